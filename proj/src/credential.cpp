#include "ehrdeleg/credential.hpp"

#include <algorithm>

#include "ehrdeleg/encoding.hpp"
#include "json.hpp"

namespace ehrdeleg::credential {

namespace encoding = ehrdeleg::encoding;
using nlohmann::json;

namespace {

constexpr size_t kSaltWidth = 16;

Bytes commitment_of(const Bytes& salt, const Bytes& claim_bytes) {
    Bytes input = salt;
    input.insert(input.end(), claim_bytes.begin(), claim_bytes.end());
    return crypto::hash32(input);
}

Bytes vc_id_of(const std::map<std::string, Bytes>& claims,
               const std::map<std::string, Bytes>& salts) {
    encoding::FieldList fields;
    for (const auto& [name, value] : claims) {
        fields.emplace_back("claim:" + name, value);
    }
    for (const auto& [name, value] : salts) {
        fields.emplace_back("salt:" + name, value);
    }
    return crypto::hash32(encoding::canonical_encode(fields));
}

// Envelope material under the issuer signature: metadata (issuer, vc_id)
// plus the full commitment map.
Bytes signing_bytes_of(const std::string& issuer_did, const Bytes& vc_id,
                       const std::map<std::string, Bytes>& commitments) {
    encoding::FieldList fields;
    fields.emplace_back("issuer", encoding::str_bytes(issuer_did));
    fields.emplace_back("vc_id", vc_id);
    for (const auto& [name, value] : commitments) {
        fields.emplace_back("commit:" + name, value);
    }
    return encoding::canonical_encode(fields);
}

Bytes binding_bytes(const Bytes& challenge, const Bytes& vc_id) {
    Bytes input = challenge;
    input.insert(input.end(), vc_id.begin(), vc_id.end());
    return input;
}

json hex_map(const std::map<std::string, Bytes>& m) {
    json j = json::object();
    for (const auto& [name, value] : m) {
        j[name] = encoding::hex_encode(value);
    }
    return j;
}

std::map<std::string, Bytes> unhex_map(const json& j) {
    std::map<std::string, Bytes> out;
    for (const auto& [name, value] : j.items()) {
        out[name] = encoding::hex_decode(value.get<std::string>());
    }
    return out;
}

}  // namespace

Bytes encode_did_list(const std::vector<std::string>& dids) {
    encoding::FieldList fields;
    for (size_t i = 0; i < dids.size(); ++i) {
        fields.emplace_back(std::to_string(i), encoding::str_bytes(dids[i]));
    }
    return encoding::canonical_encode(fields);
}

std::vector<std::string> decode_did_list(const Bytes& data) {
    auto fields = encoding::canonical_decode(data);
    std::sort(fields.begin(), fields.end(), [](const auto& a, const auto& b) {
        return std::stoul(a.first) < std::stoul(b.first);
    });
    std::vector<std::string> out;
    for (const auto& [name, value] : fields) {
        out.push_back(encoding::bytes_str(value));
    }
    return out;
}

std::map<std::string, Bytes> DelegationClaims::to_claim_map() const {
    std::map<std::string, Bytes> m;
    m[kClaimIssuer] = encoding::str_bytes(issuer_did);
    m[kClaimSubject] = encoding::str_bytes(subject_dr_did);
    m[kClaimNotaries] = encode_did_list(notary_dids);
    m[kClaimCustodian] = encoding::str_bytes(dc_did);
    m[kClaimPseudoId] = pseudo_id;
    m[kClaimEhrId] = ehr_id;
    m[kClaimNonce] = cipher_key.nonce_r;
    m[kClaimMaskedKey] = cipher_key.masked_key;
    m[kClaimParams] = encoding::canonical_encode(
        {{"mode", Bytes{static_cast<uint8_t>(
                      cipher_key.mode == threshold::CombineMode::xor_mode ? 0 : 1)}},
         {"n", Bytes{static_cast<uint8_t>(cipher_key.params.n)}},
         {"t", Bytes{static_cast<uint8_t>(cipher_key.params.t)}}});
    m[kClaimExpiry] = encoding::be64(expiry);
    m[kClaimAuthorizedList] = encode_did_list(authorized_dr_dids);
    return m;
}

std::string DelegationCredential::claim_str(const std::string& name) const {
    auto it = claims.find(name);
    if (it == claims.end()) {
        throw ParameterError("credential missing claim: " + name);
    }
    return encoding::bytes_str(it->second);
}

threshold::CipherKey DelegationCredential::cipher_key() const {
    threshold::CipherKey ck;
    auto nonce = claims.find(kClaimNonce);
    auto masked = claims.find(kClaimMaskedKey);
    auto params = claims.find(kClaimParams);
    if (nonce == claims.end() || masked == claims.end() || params == claims.end()) {
        throw ParameterError("credential missing cipher key claims");
    }
    ck.nonce_r = nonce->second;
    ck.masked_key = masked->second;
    for (const auto& [name, value] : encoding::canonical_decode(params->second)) {
        if (name == "mode") {
            if (value.size() != 1 || value[0] > 1) throw FormatError("bad mode");
            ck.mode = value[0] == 0 ? threshold::CombineMode::xor_mode
                                    : threshold::CombineMode::cascade;
        } else if (name == "n") {
            ck.params.n = value.at(0);
        } else if (name == "t") {
            ck.params.t = value.at(0);
        }
    }
    ck.params.validate();
    return ck;
}

uint64_t DelegationCredential::expiry() const {
    auto it = claims.find(kClaimExpiry);
    if (it == claims.end()) {
        throw ParameterError("credential missing expiry claim");
    }
    return encoding::parse_be64(it->second);
}

std::string DelegationCredential::serialize() const {
    json j = {
        {"claims", hex_map(claims)},
        {"commitments", hex_map(commitments)},
        {"issuer_did", issuer_did},
        {"issuer_signature", encoding::hex_encode(issuer_signature)},
        {"salts", hex_map(salts)},
        {"vc_id", encoding::hex_encode(vc_id)},
    };
    return j.dump();
}

DelegationCredential DelegationCredential::deserialize(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("credential parse failed: ") + e.what());
    }
    try {
        DelegationCredential c;
        c.claims = unhex_map(j.at("claims"));
        c.commitments = unhex_map(j.at("commitments"));
        c.issuer_did = j.at("issuer_did").get<std::string>();
        c.issuer_signature =
            encoding::hex_decode(j.at("issuer_signature").get<std::string>());
        c.salts = unhex_map(j.at("salts"));
        c.vc_id = encoding::hex_decode(j.at("vc_id").get<std::string>());
        return c;
    } catch (const json::exception& e) {
        throw FormatError(std::string("credential fields invalid: ") + e.what());
    }
}

std::string Presentation::serialize() const {
    json claims_json = json::object();
    json salts_json = json::object();
    for (const auto& [name, sv] : disclosed) {
        salts_json[name] = encoding::hex_encode(sv.first);
        claims_json[name] = encoding::hex_encode(sv.second);
    }
    json j = {
        {"claims", claims_json},
        {"commitments", hex_map(commitments)},
        {"holder_binding", encoding::hex_encode(holder_challenge_signature)},
        {"holder_did", holder_did},
        {"issuer_did", issuer_did},
        {"issuer_signature", encoding::hex_encode(issuer_signature)},
        {"salts", salts_json},
        {"vc_id", encoding::hex_encode(vc_id)},
    };
    return j.dump();
}

Presentation Presentation::deserialize(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("presentation parse failed: ") + e.what());
    }
    try {
        Presentation p;
        auto claims = unhex_map(j.at("claims"));
        auto salts = unhex_map(j.at("salts"));
        for (const auto& [name, value] : claims) {
            auto it = salts.find(name);
            if (it == salts.end()) {
                throw FormatError("disclosed claim without salt: " + name);
            }
            p.disclosed[name] = {it->second, value};
        }
        if (salts.size() != claims.size()) {
            throw FormatError("salt without disclosed claim");
        }
        p.commitments = unhex_map(j.at("commitments"));
        p.holder_challenge_signature =
            encoding::hex_decode(j.at("holder_binding").get<std::string>());
        p.holder_did = j.at("holder_did").get<std::string>();
        p.issuer_did = j.at("issuer_did").get<std::string>();
        p.issuer_signature =
            encoding::hex_decode(j.at("issuer_signature").get<std::string>());
        p.vc_id = encoding::hex_decode(j.at("vc_id").get<std::string>());
        return p;
    } catch (const json::exception& e) {
        throw FormatError(std::string("presentation fields invalid: ") + e.what());
    }
}

std::string reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::none: return "none";
        case RejectReason::bad_signature: return "bad-signature";
        case RejectReason::commitment_mismatch: return "commitment-mismatch";
        case RejectReason::bad_binding: return "bad-binding";
        case RejectReason::expired: return "expired";
        case RejectReason::revoked: return "revoked";
        case RejectReason::expiry_not_disclosed: return "expiry-not-disclosed";
    }
    return "unknown";
}

DelegationCredential issue(const identity::Wallet& owner,
                           const DelegationClaims& claims,
                           const ledger::Ledger& ledger, uint64_t now, Rng& rng) {
    if (claims.issuer_did != owner.did.to_string()) {
        throw ParameterError("issuer claim does not match the issuing wallet");
    }
    if (claims.ehr_id.empty()) throw ParameterError("claims missing ehr_id");
    if (claims.pseudo_id.empty()) throw ParameterError("claims missing pseudo_id");
    if (claims.notary_dids.empty()) throw ParameterError("claims missing notaries");
    if (claims.expiry <= now) throw ParameterError("expiry must be in the future");

    // every referenced DID must resolve
    std::vector<std::string> referenced = {claims.issuer_did, claims.subject_dr_did,
                                           claims.dc_did};
    referenced.insert(referenced.end(), claims.notary_dids.begin(),
                      claims.notary_dids.end());
    referenced.insert(referenced.end(), claims.authorized_dr_dids.begin(),
                      claims.authorized_dr_dids.end());
    for (const auto& did : referenced) {
        identity::resolve(did, ledger);
    }

    DelegationCredential credential;
    credential.issuer_did = claims.issuer_did;
    credential.claims = claims.to_claim_map();
    for (const auto& [name, value] : credential.claims) {
        Bytes salt = rng.bytes(kSaltWidth);
        credential.salts[name] = salt;
        credential.commitments[name] = commitment_of(salt, value);
    }
    credential.vc_id = vc_id_of(credential.claims, credential.salts);
    credential.issuer_signature =
        crypto::sign(signing_bytes_of(credential.issuer_did, credential.vc_id,
                                      credential.commitments),
                     owner.signing_keypair);
    return credential;
}

Presentation present(const DelegationCredential& credential,
                     const identity::Wallet& holder,
                     const std::set<std::string>& disclose, const Bytes& challenge) {
    if (credential.claim_str(kClaimSubject) != holder.did.to_string()) {
        throw BindingError("holder is not the credential subject");
    }
    Presentation p;
    p.issuer_did = credential.issuer_did;
    p.issuer_signature = credential.issuer_signature;
    p.commitments = credential.commitments;
    p.vc_id = credential.vc_id;
    for (const auto& name : disclose) {
        auto claim = credential.claims.find(name);
        auto salt = credential.salts.find(name);
        if (claim == credential.claims.end() || salt == credential.salts.end()) {
            throw ParameterError("cannot disclose unknown claim: " + name);
        }
        p.disclosed[name] = {salt->second, claim->second};
    }
    p.holder_did = holder.did.to_string();
    p.holder_challenge_signature =
        crypto::sign(binding_bytes(challenge, credential.vc_id),
                     holder.signing_keypair);
    return p;
}

Verdict verify_presentation(const Presentation& p, const Bytes& challenge,
                            const ledger::Ledger& ledger, uint64_t now) {
    identity::DidDocument issuer_doc;
    try {
        issuer_doc = identity::resolve(p.issuer_did, ledger);
    } catch (const Error&) {
        return {false, RejectReason::bad_signature};
    }
    if (!crypto::verify(signing_bytes_of(p.issuer_did, p.vc_id, p.commitments),
                        p.issuer_signature,
                        {crypto::KeyPurpose::signing, issuer_doc.signing_public_key})) {
        return {false, RejectReason::bad_signature};
    }

    for (const auto& [name, sv] : p.disclosed) {
        const auto& [salt, claim_bytes] = sv;
        auto it = p.commitments.find(name);
        if (it == p.commitments.end() || salt.size() != kSaltWidth ||
            commitment_of(salt, claim_bytes) != it->second) {
            return {false, RejectReason::commitment_mismatch};
        }
    }

    identity::DidDocument holder_doc;
    try {
        holder_doc = identity::resolve(p.holder_did, ledger);
    } catch (const Error&) {
        return {false, RejectReason::bad_binding};
    }
    if (!crypto::verify(binding_bytes(challenge, p.vc_id),
                        p.holder_challenge_signature,
                        {crypto::KeyPurpose::signing, holder_doc.signing_public_key})) {
        return {false, RejectReason::bad_binding};
    }
    auto subject = p.disclosed.find(kClaimSubject);
    if (subject != p.disclosed.end() &&
        encoding::bytes_str(subject->second.second) != p.holder_did) {
        return {false, RejectReason::bad_binding};
    }

    auto expiry = p.disclosed.find(kClaimExpiry);
    if (expiry == p.disclosed.end()) {
        return {false, RejectReason::expiry_not_disclosed};
    }
    uint64_t expiry_at;
    try {
        expiry_at = encoding::parse_be64(expiry->second.second);
    } catch (const Error&) {
        return {false, RejectReason::expiry_not_disclosed};
    }
    if (expiry_at <= now) {
        return {false, RejectReason::expired};
    }

    if (ledger.is_revoked(p.vc_id)) {
        return {false, RejectReason::revoked};
    }
    return {true, RejectReason::none};
}

ledger::RevocationEntry revoke(const crypto::KeyPair& pseudo_signing_key,
                               const Bytes& vc_id, ledger::Ledger& ledger) {
    if (pseudo_signing_key.purpose != crypto::KeyPurpose::signing) {
        throw AuthorizationError("revocation requires the pseudo signing key");
    }
    Bytes pseudo_id = crypto::hash32(pseudo_signing_key.public_key);

    ledger::RevocationEntry entry;
    entry.vc_id = vc_id;
    entry.revoked_by = pseudo_id;
    entry.revocation_signature =
        crypto::sign(entry.signing_bytes(), pseudo_signing_key);

    // double revoke keeps a single effective entry
    for (const auto& existing : ledger.revocations()) {
        if (existing.vc_id == vc_id && existing.revoked_by == pseudo_id) {
            return existing;
        }
    }
    try {
        ledger.append(ledger::RecordKind::revocation, entry.to_payload());
    } catch (const ValidationError& e) {
        throw AuthorizationError(std::string("revocation rejected: ") + e.what());
    }
    return entry;
}

}  // namespace ehrdeleg::credential
