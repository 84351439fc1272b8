#include "ehrdeleg/actors.hpp"

#include <algorithm>
#include <sstream>

#include "ehrdeleg/encoding.hpp"
#include "json.hpp"

namespace ehrdeleg::actors {

namespace encoding = ehrdeleg::encoding;
using nlohmann::json;

std::string role_name(Role r) {
    switch (r) {
        case Role::data_owner: return "DO";
        case Role::health_provider: return "HSP";
        case Role::requester: return "DR";
        case Role::notary: return "Notary";
        case Role::custodian: return "DC";
    }
    return "?";
}

std::string availability_name(Availability a) {
    switch (a) {
        case Availability::do_unavailable: return "do_unavailable";
        case Availability::do_available_approves: return "do_available_approves";
        case Availability::do_available_denies: return "do_available_denies";
    }
    return "?";
}

Availability availability_from_name(const std::string& name) {
    for (auto a : {Availability::do_unavailable, Availability::do_available_approves,
                   Availability::do_available_denies}) {
        if (availability_name(a) == name) return a;
    }
    throw ConfigError("unknown availability outcome: " + name);
}

std::string collusion_verdict_name(CollusionVerdict v) {
    return v == CollusionVerdict::sk_recovered ? "sk_recovered" : "not_recovered";
}

const std::set<std::string>& notary_disclosure() {
    static const std::set<std::string> s = {
        credential::kClaimPseudoId, credential::kClaimEhrId,
        credential::kClaimExpiry,   credential::kClaimNonce,
        credential::kClaimNotaries, credential::kClaimSubject,
        credential::kClaimAuthorizedList};
    return s;
}

const std::set<std::string>& custodian_disclosure() {
    static const std::set<std::string> s = {
        credential::kClaimPseudoId, credential::kClaimEhrId,
        credential::kClaimExpiry,   credential::kClaimNonce,
        credential::kClaimNotaries, credential::kClaimSubject};
    return s;
}

// ---- transcript ------------------------------------------------------------

void Transcript::message(const std::string& sender, const std::string& recipient,
                         const std::string& kind, const Bytes& payload_ct) {
    entries_.push_back({entries_.size(),
                        "message",
                        {{"sender", sender},
                         {"recipient", recipient},
                         {"kind", kind},
                         {"payload_digest",
                          encoding::hex_encode(crypto::hash32(payload_ct))}}});
}

void Transcript::append(uint64_t seq, const std::string& kind) {
    entries_.push_back({entries_.size(),
                        "append",
                        {{"seq", std::to_string(seq)}, {"kind", kind}}});
}

void Transcript::oracle(const std::string& pseudo_hex, const std::string& outcome) {
    entries_.push_back({entries_.size(),
                        "oracle",
                        {{"pseudo_id", pseudo_hex}, {"outcome", outcome}}});
}

void Transcript::note(const std::string& what,
                      std::map<std::string, std::string> fields) {
    fields["what"] = what;
    entries_.push_back({entries_.size(), "note", std::move(fields)});
}

std::string Transcript::to_jsonl() const {
    std::ostringstream os;
    for (const auto& e : entries_) {
        json j = {{"index", e.index}, {"type", e.type}};
        for (const auto& [k, v] : e.fields) j[k] = v;
        os << j.dump() << "\n";
    }
    return os.str();
}

Bytes Transcript::digest() const {
    return crypto::hash32(encoding::str_bytes(to_jsonl()));
}

// ---- system ----------------------------------------------------------------

System::System(const crypto::CipherProfile& profile, uint64_t seed)
    : profile_(profile), rng_(seed), store_(ledger_) {
    ledger_.set_observer([this](const ledger::Record& rec) {
        transcript_.append(rec.seq, ledger::kind_name(rec.kind));
    });
}

Actor System::make_actor(Role role) {
    Actor actor;
    actor.role = role;
    auto [wallet, doc] = identity::create_identity(now_, rng_);
    actor.wallet = std::move(wallet);
    identity::register_did(doc, ledger_);
    return actor;
}

void System::create_actors(int notary_count, int dr_count) {
    do_ = make_actor(Role::data_owner);
    hsp_ = make_actor(Role::health_provider);
    dc_ = make_actor(Role::custodian);
    notaries_.clear();
    for (int i = 0; i < notary_count; ++i) {
        notaries_.push_back(make_actor(Role::notary));
    }
    drs_.clear();
    for (int i = 0; i < dr_count; ++i) {
        drs_.push_back(make_actor(Role::requester));
    }
}

void System::set_availability_script(std::vector<Availability> script) {
    availability_script_ = std::move(script);
    availability_cursor_ = 0;
}

Availability System::next_availability(const Bytes& pseudo_id) {
    Availability outcome = Availability::do_unavailable;
    if (availability_cursor_ < availability_script_.size()) {
        outcome = availability_script_[availability_cursor_++];
    }
    transcript_.oracle(encoding::hex_encode(pseudo_id), availability_name(outcome));
    return outcome;
}

SecureMessage System::seal(const Actor& sender, const std::string& recipient_did,
                           const std::string& kind, const Bytes& plaintext) {
    identity::DidDocument doc = identity::resolve(recipient_did, ledger_);
    SecureMessage msg;
    msg.sender_did = sender.did();
    msg.recipient_did = recipient_did;
    msg.payload = crypto::pk_encrypt(
        plaintext, {crypto::KeyPurpose::encryption, doc.encryption_public_key}, rng_);
    msg.sender_signature = crypto::sign(msg.payload, sender.wallet.signing_keypair);
    transcript_.message(msg.sender_did, recipient_did, kind, msg.payload);
    return msg;
}

Bytes System::open(const Actor& recipient, const SecureMessage& msg) {
    if (msg.recipient_did != recipient.did()) {
        throw TransportError("message addressed to a different identity");
    }
    identity::DidDocument sender_doc;
    try {
        sender_doc = identity::resolve(msg.sender_did, ledger_);
    } catch (const NotFoundError&) {
        throw TransportError("unknown sender identity");
    }
    if (!crypto::verify(msg.payload, msg.sender_signature,
                        {crypto::KeyPurpose::signing, sender_doc.signing_public_key})) {
        throw TransportError("sender signature invalid");
    }
    return crypto::pk_decrypt(msg.payload, recipient.wallet.encryption_keypair);
}

uint64_t System::append_record(ledger::RecordKind kind, const Bytes& payload) {
    return ledger_.append(kind, payload);
}

void System::append_access_event(const Bytes& pseudo_id, const Bytes& ehr_id,
                                 const std::string& actor_did,
                                 ledger::AccessEventType type) {
    ledger::AccessEvent event;
    event.pseudo_id = pseudo_id;
    event.ehr_id = ehr_id;
    event.actor_tag = ledger::actor_tag(actor_did, pseudo_id);
    event.event = type;
    event.timestamp = now_;
    append_record(ledger::RecordKind::access_event, event.to_payload());
}

// ---- flow 1: secure storing -------------------------------------------------

Bytes System::flow1_store_ehr(const Bytes& ehr_plaintext) {
    // HSP samples sk and uploads the encrypted record to the custodian.
    Bytes sk = crypto::random_block_key(profile_, rng_);
    crypto::BlockCipherKey sk_key{sk};
    Bytes ciphertext = crypto::sym_encrypt(ehr_plaintext, sk_key, rng_);

    SecureMessage upload = seal(hsp_, dc_.did(), "upload_request", ciphertext);
    Bytes received = open(dc_, upload);
    Bytes ehr_id = store_.upload(received, hsp_.did(), rng_);
    SecureMessage upload_ack = seal(dc_, hsp_.did(), "upload_response", ehr_id);
    Bytes ehr_id_at_hsp = open(hsp_, upload_ack);

    std::string ehr_hex = encoding::hex_encode(ehr_id_at_hsp);
    hsp_.wallet.stored_secrets["sk:" + ehr_hex] = sk;
    hsp_.wallet.stored_secrets["dc_did:" + ehr_hex] = encoding::str_bytes(dc_.did());

    // sk, ehr id and custodian identity travel to the DO over the secure
    // channel; the DO stores them in its wallet.
    Bytes package = encoding::canonical_encode({
        {"dc_did", encoding::str_bytes(dc_.did())},
        {"ehr_id", ehr_id_at_hsp},
        {"sk", sk},
    });
    SecureMessage to_owner = seal(hsp_, do_.did(), "store_result", package);
    Bytes opened = open(do_, to_owner);
    for (const auto& [name, value] : encoding::canonical_decode(opened)) {
        if (name == "sk") do_.wallet.stored_secrets["sk:" + ehr_hex] = value;
        if (name == "dc_did") do_.wallet.stored_secrets["dc_did:" + ehr_hex] = value;
    }
    return ehr_id;
}

// ---- flow 2: delegation ------------------------------------------------------

Delegation& System::flow2_delegate(const Bytes& ehr_id,
                                   const threshold::ThresholdParams& params,
                                   uint64_t expiry_ticks,
                                   threshold::CombineMode mode) {
    if (params.n != static_cast<int>(notaries_.size()) + 1) {
        throw ConfigError("n must equal notary count + 1 (the custodian)");
    }
    params.validate();
    std::string ehr_hex = encoding::hex_encode(ehr_id);
    auto sk_it = do_.wallet.stored_secrets.find("sk:" + ehr_hex);
    if (sk_it == do_.wallet.stored_secrets.end()) {
        throw ParameterError("data owner wallet holds no secret key for this record");
    }
    const Bytes& sk = sk_it->second;

    threshold::KeyShareSet shares = threshold::generate_key_shares(params, profile_, rng_);
    threshold::CipherKey cipher_key =
        threshold::derive_cipher_key(sk, shares, mode, profile_, rng_);

    // fresh pseudo identity per delegation
    crypto::KeyPair ephemeral = crypto::generate_signing_keypair(rng_);
    Bytes pseudo_id = crypto::hash32(ephemeral.public_key);
    std::string pseudo_hex = encoding::hex_encode(pseudo_id);
    do_.wallet.stored_secrets["pseudo_sk:" + pseudo_hex] = ephemeral.private_key;
    do_.wallet.stored_secrets["pseudo_pk:" + pseudo_hex] = ephemeral.public_key;

    // the DO retains the full generating key set
    encoding::FieldList key_fields;
    for (const auto& [b, key] : shares.keys) {
        key_fields.emplace_back(threshold::index_set_name(b), key.key_bytes);
    }
    do_.wallet.stored_secrets["shares:" + pseudo_hex] =
        encoding::canonical_encode(key_fields);

    // blinded recipient share blobs: notaries take party indices 1..n-1,
    // the custodian is always party n
    ledger::AuthorizationRecord record;
    record.pseudo_id = pseudo_id;
    record.ephemeral_public_key = ephemeral.public_key;
    record.ehr_id = ehr_id;
    record.mode = mode;
    record.params = params;
    auto add_recipient = [&](const Actor& recipient, int party_index) {
        threshold::PartyShares ps;
        ps.party_index = party_index;
        for (const auto& b : shares.holdings_of(party_index)) {
            ps.keys[b] = shares.keys.at(b);
        }
        identity::DidDocument doc = identity::resolve(recipient.did(), ledger_);
        Bytes blob = crypto::pk_encrypt(
            ps.serialize(), {crypto::KeyPurpose::encryption, doc.encryption_public_key},
            rng_);
        record.blinded_shares[ledger::recipient_tag(recipient.did(), pseudo_id)] = blob;
    };
    for (size_t i = 0; i < notaries_.size(); ++i) {
        add_recipient(notaries_[i], static_cast<int>(i) + 1);
    }
    add_recipient(dc_, params.n);
    record.posting_signature = crypto::sign(record.signing_bytes(), ephemeral);
    append_record(ledger::RecordKind::authorization, record.to_payload());

    Delegation delegation;
    delegation.pseudo_id = pseudo_id;
    delegation.ehr_id = ehr_id;
    delegation.params = params;
    delegation.mode = mode;
    delegation.expiry = now_ + expiry_ticks;

    std::vector<std::string> notary_dids, dr_dids;
    for (const auto& n : notaries_) notary_dids.push_back(n.did());
    for (const auto& d : drs_) dr_dids.push_back(d.did());

    for (auto& dr : drs_) {
        credential::DelegationClaims claims;
        claims.issuer_did = do_.did();
        claims.subject_dr_did = dr.did();
        claims.notary_dids = notary_dids;
        claims.dc_did = dc_.did();
        claims.pseudo_id = pseudo_id;
        claims.ehr_id = ehr_id;
        claims.cipher_key = cipher_key;
        claims.expiry = delegation.expiry;
        claims.authorized_dr_dids = dr_dids;

        credential::DelegationCredential vc =
            credential::issue(do_.wallet, claims, ledger_, now_, rng_);
        std::string serialized = vc.serialize();
        do_.wallet.stored_credentials.push_back(serialized);

        SecureMessage delivery = seal(do_, dr.did(), "credential_delivery",
                                      encoding::str_bytes(serialized));
        Bytes opened = open(dr, delivery);
        dr.wallet.stored_credentials.push_back(encoding::bytes_str(opened));
        delegation.vc_ids.push_back(vc.vc_id);
    }

    delegations_.push_back(std::move(delegation));
    return delegations_.back();
}

// ---- flow 3: secure access ---------------------------------------------------

namespace {

credential::DelegationCredential find_credential(const Actor& dr,
                                                 const Delegation& delegation) {
    for (const auto& serialized : dr.wallet.stored_credentials) {
        credential::DelegationCredential vc =
            credential::DelegationCredential::deserialize(serialized);
        if (vc.claims.at(credential::kClaimPseudoId) == delegation.pseudo_id &&
            vc.claims.at(credential::kClaimEhrId) == delegation.ehr_id) {
            return vc;
        }
    }
    throw NotFoundError("requester holds no credential for this delegation");
}

Bytes session_key(const Bytes& pseudo_id, const Bytes& ehr_id,
                  const std::string& dr_did) {
    Bytes input = pseudo_id;
    input.insert(input.end(), ehr_id.begin(), ehr_id.end());
    Bytes did_bytes = encoding::str_bytes(dr_did);
    input.insert(input.end(), did_bytes.begin(), did_bytes.end());
    return crypto::hash32(input);
}

}  // namespace

System::VerifierDecision System::verifier_round(
    Actor& verifier, Actor& dr, const credential::DelegationCredential& cred,
    const std::set<std::string>& disclosure, const std::string& request_kind) {
    Bytes pseudo_id = cred.claims.at(credential::kClaimPseudoId);
    Bytes ehr_id = cred.claims.at(credential::kClaimEhrId);

    Bytes request = encoding::canonical_encode({
        {"ehr_id", ehr_id},
        {"pseudo_id", pseudo_id},
    });
    open(verifier, seal(dr, verifier.did(), request_kind, request));

    Bytes challenge = rng_.bytes(32);
    Bytes challenge_at_dr =
        open(dr, seal(verifier, dr.did(), "challenge", challenge));

    credential::Presentation presentation =
        credential::present(cred, dr.wallet, disclosure, challenge_at_dr);
    Bytes submitted = open(
        verifier, seal(dr, verifier.did(), "presentation",
                       encoding::str_bytes(presentation.serialize())));
    credential::Presentation received =
        credential::Presentation::deserialize(encoding::bytes_str(submitted));

    credential::Verdict verdict =
        credential::verify_presentation(received, challenge, ledger_, now_);
    VerifierDecision decision;
    decision.presentation = received;
    if (!verdict.accepted) {
        decision.ok = false;
        decision.reason = credential::reject_reason_name(verdict.reason);
        return decision;
    }
    // fixed disclosure set for the role must actually be present
    for (const auto& name : disclosure) {
        if (!received.disclosed.count(name)) {
            decision.ok = false;
            decision.reason = "missing-disclosure:" + name;
            return decision;
        }
    }
    verifier.seen_presentations.push_back(received.serialize());
    decision.ok = true;
    return decision;
}

AccessOutcome System::flow3_access(
    size_t delegation_index, int dr_index, const std::vector<int>& notary_indices,
    const std::optional<std::set<std::string>>& notary_disclosure_override) {
    const Delegation& delegation = delegations_.at(delegation_index);
    Actor& dr = drs_.at(static_cast<size_t>(dr_index));
    credential::DelegationCredential cred = find_credential(dr, delegation);
    threshold::CipherKey cipher_key = cred.cipher_key();
    Bytes pseudo_id = delegation.pseudo_id;
    Bytes ehr_id = delegation.ehr_id;
    size_t block_count = cipher_key.masked_key.size() / profile_.block_width;

    const std::set<std::string>& n_disclosure =
        notary_disclosure_override ? *notary_disclosure_override : notary_disclosure();

    AccessOutcome outcome;
    std::vector<threshold::PartialContribution> partials;
    std::vector<std::string> used_notary_dids;

    // ---- notary legs ----
    for (int ni : notary_indices) {
        Actor& notary = notaries_.at(static_cast<size_t>(ni));
        VerifierDecision decision =
            verifier_round(notary, dr, cred, n_disclosure, "access_request");
        if (!decision.ok) {
            append_access_event(pseudo_id, ehr_id, notary.did(),
                                ledger::AccessEventType::notary_denied);
            open(dr, seal(notary, dr.did(), "access_denied",
                          encoding::str_bytes(decision.reason)));
            outcome.deny_reason = decision.reason;
            return outcome;
        }

        Availability availability = next_availability(pseudo_id);
        if (availability == Availability::do_available_denies) {
            append_access_event(pseudo_id, ehr_id, notary.did(),
                                ledger::AccessEventType::notary_denied);
            open(dr, seal(notary, dr.did(), "access_denied",
                          encoding::str_bytes("owner-denied")));
            outcome.deny_reason = "owner-denied";
            return outcome;
        }

        auto record = ledger_.find_authorization(pseudo_id, ehr_id);
        if (!record) {
            append_access_event(pseudo_id, ehr_id, notary.did(),
                                ledger::AccessEventType::notary_denied);
            outcome.deny_reason = "no-authorization-record";
            return outcome;
        }
        threshold::PartyShares shares = ledger::fetch_shares_for(
            notary.did(), notary.wallet.encryption_keypair, *record);
        for (const auto& [b, key] : shares.keys) notary.fetched_keys[b] = key;

        Bytes nonce = decision.presentation.disclosed.at(credential::kClaimNonce).second;
        if (record->mode == threshold::CombineMode::xor_mode) {
            threshold::PartialContribution partial =
                threshold::compute_partial(shares, nonce, profile_, block_count);
            Bytes reply = open(dr, seal(notary, dr.did(), "partial_response",
                                        partial.serialize()));
            partials.push_back(threshold::PartialContribution::deserialize(reply));
        } else {
            notary.approved_sessions.insert(session_key(pseudo_id, ehr_id, dr.did()));
            open(dr, seal(notary, dr.did(), "cascade_approved", Bytes{}));
        }
        notary.outbox.push_back(
            Notification{do_.did(), pseudo_id, ehr_id, dr.did(), now_});
        append_access_event(pseudo_id, ehr_id, notary.did(),
                            ledger::AccessEventType::notary_verified);
        used_notary_dids.push_back(notary.did());
    }

    // ---- custodian leg ----
    {
        Bytes request = encoding::canonical_encode({
            {"ehr_id", ehr_id},
            {"pseudo_id", pseudo_id},
            {"used_notaries", credential::encode_did_list(used_notary_dids)},
        });
        open(dc_, seal(dr, dc_.did(), "dc_access_request", request));

        VerifierDecision decision = verifier_round(dc_, dr, cred,
                                                   custodian_disclosure(),
                                                   "dc_verification");
        if (!decision.ok) {
            outcome.deny_reason = decision.reason;
            open(dr, seal(dc_, dr.did(), "access_denied",
                          encoding::str_bytes(decision.reason)));
            return outcome;
        }

        if (dc_checks_notary_event_) {
            bool notary_ok = false;
            for (const auto& event : ledger_.access_events()) {
                if (event.event != ledger::AccessEventType::notary_verified) continue;
                if (event.pseudo_id != pseudo_id || event.ehr_id != ehr_id) continue;
                for (const auto& did : used_notary_dids) {
                    if (event.actor_tag == ledger::actor_tag(did, pseudo_id)) {
                        notary_ok = true;
                    }
                }
            }
            if (!notary_ok) {
                outcome.deny_reason = "notary-not-verified";
                open(dr, seal(dc_, dr.did(), "access_denied",
                              encoding::str_bytes(outcome.deny_reason)));
                return outcome;
            }
        }
        append_access_event(pseudo_id, ehr_id, dc_.did(),
                            ledger::AccessEventType::dc_verified);

        auto record = ledger_.find_authorization(pseudo_id, ehr_id);
        if (!record) {
            outcome.deny_reason = "no-authorization-record";
            return outcome;
        }
        threshold::PartyShares shares = ledger::fetch_shares_for(
            dc_.did(), dc_.wallet.encryption_keypair, *record);
        for (const auto& [b, key] : shares.keys) dc_.fetched_keys[b] = key;

        Bytes nonce = decision.presentation.disclosed.at(credential::kClaimNonce).second;
        std::optional<threshold::PartialContribution> dc_partial;
        if (record->mode == threshold::CombineMode::xor_mode) {
            dc_partial = threshold::compute_partial(shares, nonce, profile_, block_count);
        } else {
            dc_.approved_sessions.insert(session_key(pseudo_id, ehr_id, dr.did()));
        }

        store::AccessLink link =
            store_.grant_link(ehr_id, dr.did(), pseudo_id, link_ttl_, now_, rng_);
        issued_tokens_.push_back(link.token);
        append_access_event(pseudo_id, ehr_id, dc_.did(),
                            ledger::AccessEventType::dc_granted_link);

        encoding::FieldList reply_fields = {
            {"expires_at", encoding::be64(link.expires_at)},
            {"token", link.token},
        };
        if (dc_partial) {
            reply_fields.emplace_back("partial", dc_partial->serialize());
        }
        Bytes reply = open(dr, seal(dc_, dr.did(), "dc_response",
                                    encoding::canonical_encode(reply_fields)));

        Bytes token;
        for (const auto& [name, value] : encoding::canonical_decode(reply)) {
            if (name == "token") token = value;
            if (name == "partial") {
                partials.push_back(threshold::PartialContribution::deserialize(value));
            }
        }

        // ---- combine, download, decrypt ----
        Bytes sk;
        if (cipher_key.mode == threshold::CombineMode::xor_mode) {
            sk = threshold::combine_xor(cipher_key, partials, profile_);
        } else {
            auto step = [&](const threshold::KeyIndexSet& b,
                            const Bytes& block) -> std::optional<Bytes> {
                // route to the first cooperating holder of this key index
                for (int ni : notary_indices) {
                    if (std::find(b.begin(), b.end(), ni + 1) == b.end()) continue;
                    Actor& notary = notaries_.at(static_cast<size_t>(ni));
                    Bytes step_request = encoding::canonical_encode(
                        {{"block", block},
                         {"ehr_id", ehr_id},
                         {"mask", encoding::be32(threshold::index_set_mask(b))},
                         {"pseudo_id", pseudo_id}});
                    Bytes opened = open(
                        notary, seal(dr, notary.did(), "cascade_step", step_request));
                    if (!notary.approved_sessions.count(
                            session_key(pseudo_id, ehr_id, dr.did()))) {
                        throw AuthorizationError("cascade step without verification");
                    }
                    auto key = notary.fetched_keys.find(b);
                    if (key == notary.fetched_keys.end()) return std::nullopt;
                    Bytes enc = crypto::block_encrypt(block, key->second, profile_);
                    return open(dr, seal(notary, dr.did(), "cascade_step_response", enc));
                }
                if (std::find(b.begin(), b.end(), cipher_key.params.n) != b.end()) {
                    if (!dc_.approved_sessions.count(
                            session_key(pseudo_id, ehr_id, dr.did()))) {
                        throw AuthorizationError("cascade step without verification");
                    }
                    auto key = dc_.fetched_keys.find(b);
                    if (key == dc_.fetched_keys.end()) return std::nullopt;
                    Bytes enc = crypto::block_encrypt(block, key->second, profile_);
                    return open(dr, seal(dc_, dr.did(), "cascade_step_response", enc));
                }
                return std::nullopt;
            };
            sk = threshold::combine_cascade(cipher_key, step, profile_);
        }

        Bytes ciphertext = store_.download(token, now_);
        Bytes plaintext = crypto::sym_decrypt(ciphertext, crypto::BlockCipherKey{sk});
        dr.wallet.stored_secrets["sk:" + encoding::hex_encode(ehr_id)] = sk;

        outcome.granted = true;
        outcome.plaintext = std::move(plaintext);
    }
    return outcome;
}

// ---- revocation ---------------------------------------------------------------

ledger::RevocationEntry System::revoke_delegation(size_t delegation_index,
                                                  size_t credential_index) {
    const Delegation& delegation = delegations_.at(delegation_index);
    std::string pseudo_hex = encoding::hex_encode(delegation.pseudo_id);
    crypto::KeyPair ephemeral{
        crypto::KeyPurpose::signing,
        do_.wallet.stored_secrets.at("pseudo_pk:" + pseudo_hex),
        do_.wallet.stored_secrets.at("pseudo_sk:" + pseudo_hex)};
    return credential::revoke(ephemeral, delegation.vc_ids.at(credential_index),
                              ledger_);
}

// ---- collusion audit ------------------------------------------------------------

CollusionVerdict System::adversary_collude(size_t delegation_index,
                                           const Coalition& coalition) {
    const Delegation& delegation = delegations_.at(delegation_index);
    auto record = ledger_.find_authorization(delegation.pseudo_id, delegation.ehr_id);
    if (!record) return CollusionVerdict::not_recovered;

    // pool every key the coalition's share-holders can read off the ledger
    std::map<threshold::KeyIndexSet, crypto::BlockCipherKey> pooled;
    for (int ni : coalition.notary_indices) {
        Actor& notary = notaries_.at(static_cast<size_t>(ni));
        threshold::PartyShares shares = ledger::fetch_shares_for(
            notary.did(), notary.wallet.encryption_keypair, *record);
        for (const auto& [b, key] : shares.keys) pooled[b] = key;
    }
    if (coalition.include_dc) {
        threshold::PartyShares shares = ledger::fetch_shares_for(
            dc_.did(), dc_.wallet.encryption_keypair, *record);
        for (const auto& [b, key] : shares.keys) pooled[b] = key;
    }

    transcript_.note("collusion_attempt",
                     {{"pseudo_id", encoding::hex_encode(delegation.pseudo_id)},
                      {"with_dr", coalition.include_dr ? "yes" : "no"},
                      {"with_dc", coalition.include_dc ? "yes" : "no"},
                      {"notaries", std::to_string(coalition.notary_indices.size())},
                      {"pooled_keys", std::to_string(pooled.size())}});

    // without the DR there is no cipherKey and no nonce
    if (!coalition.include_dr) return CollusionVerdict::not_recovered;

    Actor& dr = drs_.at(static_cast<size_t>(coalition.dr_index));
    credential::DelegationCredential cred = find_credential(dr, delegation);
    threshold::CipherKey cipher_key = cred.cipher_key();

    Bytes true_sk = do_.wallet.stored_secrets.at(
        "sk:" + encoding::hex_encode(delegation.ehr_id));

    if (profile_.block_width == 1) {
        // exact information-theoretic check by enumeration
        std::vector<uint8_t> candidates =
            threshold::consistent_sk_candidates(cipher_key, pooled, profile_);
        if (candidates.size() == 1 && candidates[0] == true_sk[0]) {
            return CollusionVerdict::sk_recovered;
        }
        return CollusionVerdict::not_recovered;
    }

    // production: reconstruction succeeds iff the pooled labels cover all
    // key index sets
    try {
        Bytes sk;
        if (cipher_key.mode == threshold::CombineMode::xor_mode) {
            threshold::PartialContribution pooled_partial;
            pooled_partial.party_index = 1;
            size_t blocks = cipher_key.masked_key.size() / profile_.block_width;
            threshold::PartyShares ps;
            ps.party_index = 1;
            ps.keys = pooled;
            if (pooled.empty()) return CollusionVerdict::not_recovered;
            pooled_partial = threshold::compute_partial(ps, cipher_key.nonce_r,
                                                        profile_, blocks);
            sk = threshold::combine_xor(cipher_key, {pooled_partial}, profile_);
        } else {
            auto step = [&](const threshold::KeyIndexSet& b,
                            const Bytes& block) -> std::optional<Bytes> {
                auto it = pooled.find(b);
                if (it == pooled.end()) return std::nullopt;
                return crypto::block_encrypt(block, it->second, profile_);
            };
            sk = threshold::combine_cascade(cipher_key, step, profile_);
        }
        return sk == true_sk ? CollusionVerdict::sk_recovered
                             : CollusionVerdict::not_recovered;
    } catch (const InsufficientPartiesError&) {
        return CollusionVerdict::not_recovered;
    }
}

// ---- tamper suite -----------------------------------------------------------------

std::string System::tamper_case(const std::string& name, size_t delegation_index) {
    const Delegation& delegation = delegations_.at(delegation_index);
    Actor& dr = drs_.at(0);
    credential::DelegationCredential cred = find_credential(dr, delegation);

    auto full_disclosure = [&]() {
        std::set<std::string> all;
        for (const auto& [n, v] : cred.claims) all.insert(n);
        return all;
    };

    if (name == "spoofed_sender") {
        SecureMessage msg = seal(dr, notaries_.at(0).did(), "access_request",
                                 encoding::str_bytes("request"));
        msg.sender_signature = crypto::sign(msg.payload, hsp_.wallet.signing_keypair);
        try {
            open(notaries_.at(0), msg);
            return "accepted";
        } catch (const TransportError&) {
            return "transport-error";
        }
    }
    if (name == "vc_claim_flip") {
        Bytes challenge = rng_.bytes(32);
        credential::Presentation p =
            credential::present(cred, dr.wallet, notary_disclosure(), challenge);
        p.disclosed[credential::kClaimEhrId].second[0] ^= 0x01;
        credential::Verdict v =
            credential::verify_presentation(p, challenge, ledger_, now_);
        return v.accepted ? "accepted" : credential::reject_reason_name(v.reason);
    }
    if (name == "vc_envelope_flip") {
        Bytes challenge = rng_.bytes(32);
        credential::Presentation p =
            credential::present(cred, dr.wallet, notary_disclosure(), challenge);
        p.issuer_signature[0] ^= 0x01;
        credential::Verdict v =
            credential::verify_presentation(p, challenge, ledger_, now_);
        return v.accepted ? "accepted" : credential::reject_reason_name(v.reason);
    }
    if (name == "replay_presentation") {
        Bytes challenge = rng_.bytes(32);
        credential::Presentation p =
            credential::present(cred, dr.wallet, notary_disclosure(), challenge);
        credential::Verdict first =
            credential::verify_presentation(p, challenge, ledger_, now_);
        if (!first.accepted) return "setup-failed";
        Bytes new_challenge = rng_.bytes(32);
        credential::Verdict replayed =
            credential::verify_presentation(p, new_challenge, ledger_, now_);
        return replayed.accepted ? "accepted"
                                 : credential::reject_reason_name(replayed.reason);
    }
    if (name == "stolen_vc") {
        // a non-subject wallet crafts a presentation from stolen claims
        Actor& thief = drs_.size() > 1 ? drs_.at(1) : hsp_;
        Bytes challenge = rng_.bytes(32);
        credential::Presentation honest =
            credential::present(cred, dr.wallet, full_disclosure(), challenge);
        credential::Presentation forged = honest;
        forged.holder_did = thief.did();
        Bytes binding = challenge;
        binding.insert(binding.end(), cred.vc_id.begin(), cred.vc_id.end());
        forged.holder_challenge_signature =
            crypto::sign(binding, thief.wallet.signing_keypair);
        credential::Verdict v =
            credential::verify_presentation(forged, challenge, ledger_, now_);
        return v.accepted ? "accepted" : credential::reject_reason_name(v.reason);
    }
    if (name == "expired_vc") {
        Bytes challenge = rng_.bytes(32);
        credential::Presentation p =
            credential::present(cred, dr.wallet, notary_disclosure(), challenge);
        credential::Verdict v = credential::verify_presentation(
            p, challenge, ledger_, delegation.expiry);  // at expiry tick
        return v.accepted ? "accepted" : credential::reject_reason_name(v.reason);
    }
    if (name == "ehr_blob_flip") {
        store_.tamper_blob_for_tests(delegation.ehr_id, 5);
        std::string observed;
        try {
            AccessOutcome outcome = flow3_access(delegation_index, 0, {0});
            observed = outcome.granted ? "accepted" : outcome.deny_reason;
        } catch (const AuthenticityError&) {
            observed = "authenticity-error";
        }
        store_.tamper_blob_for_tests(delegation.ehr_id, 5);  // restore
        return observed;
    }
    if (name == "ledger_tamper") {
        std::string text = ledger_.export_text();
        // flip one payload hex digit on the first line
        size_t pos = text.find("\"payload\":\"");
        pos += std::string("\"payload\":\"").size();
        text[pos] = text[pos] == '0' ? '1' : '0';
        ledger::Ledger copy;
        try {
            copy.load_text(text);
            return copy.verify_chain() ? "accepted" : "chain-invalid";
        } catch (const ValidationError&) {
            return "chain-invalid";
        } catch (const FormatError&) {
            return "chain-invalid";
        }
    }
    if (name == "eavesdrop_scan") {
        Bytes sk = do_.wallet.stored_secrets.at(
            "sk:" + encoding::hex_encode(delegation.ehr_id));
        Bytes package = encoding::canonical_encode({{"sk", sk}});
        SecureMessage msg = seal(hsp_, do_.did(), "store_result", package);
        return encoding::contains(msg.payload, sk) ? "sk-leaked" : "sk-not-leaked";
    }
    if (name == "cross_mode") {
        threshold::CipherKey ck = cred.cipher_key();
        if (ck.mode == threshold::CombineMode::xor_mode) {
            auto step = [](const threshold::KeyIndexSet&,
                           const Bytes& block) -> std::optional<Bytes> {
                return block;
            };
            try {
                threshold::combine_cascade(ck, step, profile_);
                return "accepted";
            } catch (const ModeError&) {
                return "mode-error";
            }
        }
        try {
            threshold::combine_xor(ck, {}, profile_);
            return "accepted";
        } catch (const ModeError&) {
            return "mode-error";
        } catch (const ParameterError&) {
            return "mode-error";
        }
    }
    if (name == "revoke_unrelated_key") {
        crypto::KeyPair unrelated = crypto::generate_signing_keypair(rng_);
        try {
            credential::revoke(unrelated, delegation.vc_ids.at(0), ledger_);
            return "accepted";
        } catch (const AuthorizationError&) {
            return "authorization-error";
        }
    }
    if (name == "nonrepudiation_check") {
        std::set<std::string> kinds;
        for (const auto& event : ledger_.access_events()) {
            if (event.pseudo_id == delegation.pseudo_id &&
                event.ehr_id == delegation.ehr_id) {
                kinds.insert(ledger::access_event_name(event.event));
            }
        }
        return kinds.size() >= 3 ? "events-recorded" : "events-missing";
    }
    throw ConfigError("unknown tamper case: " + name);
}

}  // namespace ehrdeleg::actors
