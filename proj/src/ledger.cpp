#include "ehrdeleg/ledger.hpp"

#include <sstream>

#include "ehrdeleg/encoding.hpp"
#include "json.hpp"

namespace ehrdeleg::ledger {

namespace encoding = ehrdeleg::encoding;
using nlohmann::json;

std::string kind_name(RecordKind k) {
    switch (k) {
        case RecordKind::did_registration: return "did_registration";
        case RecordKind::authorization: return "authorization";
        case RecordKind::revocation: return "revocation";
        case RecordKind::access_event: return "access_event";
    }
    throw FormatError("unknown record kind");
}

RecordKind kind_from_name(const std::string& name) {
    if (name == "did_registration") return RecordKind::did_registration;
    if (name == "authorization") return RecordKind::authorization;
    if (name == "revocation") return RecordKind::revocation;
    if (name == "access_event") return RecordKind::access_event;
    throw FormatError("unknown record kind: " + name);
}

Bytes record_hash_of(uint64_t seq, RecordKind kind, const Bytes& payload,
                     const Bytes& prev_hash) {
    Bytes input = encoding::be64(seq);
    input.push_back(static_cast<uint8_t>(kind));
    input.insert(input.end(), payload.begin(), payload.end());
    input.insert(input.end(), prev_hash.begin(), prev_hash.end());
    return crypto::hash32(input);
}

std::string access_event_name(AccessEventType t) {
    switch (t) {
        case AccessEventType::notary_verified: return "notary_verified";
        case AccessEventType::notary_denied: return "notary_denied";
        case AccessEventType::dc_verified: return "dc_verified";
        case AccessEventType::dc_granted_link: return "dc_granted_link";
        case AccessEventType::download_completed: return "download_completed";
    }
    throw FormatError("unknown access event type");
}

namespace {

AccessEventType access_event_from_name(const std::string& name) {
    for (auto t : {AccessEventType::notary_verified, AccessEventType::notary_denied,
                   AccessEventType::dc_verified, AccessEventType::dc_granted_link,
                   AccessEventType::download_completed}) {
        if (access_event_name(t) == name) return t;
    }
    throw FormatError("unknown access event type: " + name);
}

Bytes require_field(const encoding::FieldList& fields, const std::string& name) {
    for (const auto& [n, v] : fields) {
        if (n == name) return v;
    }
    throw FormatError("missing field: " + name);
}

}  // namespace

Bytes recipient_tag(const std::string& recipient_did, const Bytes& pseudo_id) {
    Bytes input = encoding::str_bytes(recipient_did);
    input.insert(input.end(), pseudo_id.begin(), pseudo_id.end());
    return crypto::hash32(input);
}

Bytes actor_tag(const std::string& actor_did, const Bytes& pseudo_id) {
    return recipient_tag(actor_did, pseudo_id);
}

// ---- payload codecs ------------------------------------------------------

Bytes DidRegistration::to_payload() const {
    return encoding::canonical_encode({
        {"created_at", encoding::be64(created_at)},
        {"did", encoding::str_bytes(did)},
        {"encryption_public", encryption_public},
        {"signing_public", signing_public},
    });
}

DidRegistration DidRegistration::from_payload(const Bytes& payload) {
    auto fields = encoding::canonical_decode(payload);
    DidRegistration out;
    out.created_at = encoding::parse_be64(require_field(fields, "created_at"));
    out.did = encoding::bytes_str(require_field(fields, "did"));
    out.encryption_public = require_field(fields, "encryption_public");
    out.signing_public = require_field(fields, "signing_public");
    return out;
}

Bytes AuthorizationRecord::signing_bytes() const {
    encoding::FieldList share_fields;
    for (const auto& [tag, blob] : blinded_shares) {
        share_fields.emplace_back(encoding::hex_encode(tag), blob);
    }
    return encoding::canonical_encode({
        {"blinded_shares", encoding::canonical_encode(share_fields)},
        {"ehr_id", ehr_id},
        {"ephemeral_public_key", ephemeral_public_key},
        {"mode", Bytes{static_cast<uint8_t>(
                     mode == threshold::CombineMode::xor_mode ? 0 : 1)}},
        {"n", Bytes{static_cast<uint8_t>(params.n)}},
        {"pseudo_id", pseudo_id},
        {"t", Bytes{static_cast<uint8_t>(params.t)}},
    });
}

Bytes AuthorizationRecord::to_payload() const {
    encoding::FieldList share_fields;
    for (const auto& [tag, blob] : blinded_shares) {
        share_fields.emplace_back(encoding::hex_encode(tag), blob);
    }
    return encoding::canonical_encode({
        {"blinded_shares", encoding::canonical_encode(share_fields)},
        {"ehr_id", ehr_id},
        {"ephemeral_public_key", ephemeral_public_key},
        {"mode", Bytes{static_cast<uint8_t>(
                     mode == threshold::CombineMode::xor_mode ? 0 : 1)}},
        {"n", Bytes{static_cast<uint8_t>(params.n)}},
        {"posting_signature", posting_signature},
        {"pseudo_id", pseudo_id},
        {"t", Bytes{static_cast<uint8_t>(params.t)}},
    });
}

AuthorizationRecord AuthorizationRecord::from_payload(const Bytes& payload) {
    auto fields = encoding::canonical_decode(payload);
    AuthorizationRecord out;
    for (const auto& [tag_hex, blob] :
         encoding::canonical_decode(require_field(fields, "blinded_shares"))) {
        out.blinded_shares[encoding::hex_decode(tag_hex)] = blob;
    }
    out.ehr_id = require_field(fields, "ehr_id");
    out.ephemeral_public_key = require_field(fields, "ephemeral_public_key");
    Bytes mode = require_field(fields, "mode");
    if (mode.size() != 1 || mode[0] > 1) throw FormatError("bad mode byte");
    out.mode = mode[0] == 0 ? threshold::CombineMode::xor_mode
                            : threshold::CombineMode::cascade;
    out.params.n = require_field(fields, "n").at(0);
    out.params.t = require_field(fields, "t").at(0);
    out.posting_signature = require_field(fields, "posting_signature");
    out.pseudo_id = require_field(fields, "pseudo_id");
    return out;
}

Bytes AccessEvent::to_payload() const {
    return encoding::canonical_encode({
        {"actor_tag", actor_tag},
        {"ehr_id", ehr_id},
        {"event", encoding::str_bytes(access_event_name(event))},
        {"pseudo_id", pseudo_id},
        {"timestamp", encoding::be64(timestamp)},
    });
}

AccessEvent AccessEvent::from_payload(const Bytes& payload) {
    auto fields = encoding::canonical_decode(payload);
    AccessEvent out;
    out.actor_tag = require_field(fields, "actor_tag");
    out.ehr_id = require_field(fields, "ehr_id");
    out.event = access_event_from_name(
        encoding::bytes_str(require_field(fields, "event")));
    out.pseudo_id = require_field(fields, "pseudo_id");
    out.timestamp = encoding::parse_be64(require_field(fields, "timestamp"));
    return out;
}

Bytes RevocationEntry::signing_bytes() const {
    return encoding::canonical_encode({
        {"revoked_by", revoked_by},
        {"vc_id", vc_id},
    });
}

Bytes RevocationEntry::to_payload() const {
    return encoding::canonical_encode({
        {"revocation_signature", revocation_signature},
        {"revoked_by", revoked_by},
        {"vc_id", vc_id},
    });
}

RevocationEntry RevocationEntry::from_payload(const Bytes& payload) {
    auto fields = encoding::canonical_decode(payload);
    RevocationEntry out;
    out.revocation_signature = require_field(fields, "revocation_signature");
    out.revoked_by = require_field(fields, "revoked_by");
    out.vc_id = require_field(fields, "vc_id");
    return out;
}

// ---- chain ----------------------------------------------------------------

void Ledger::validate(RecordKind kind, const Bytes& payload) const {
    switch (kind) {
        case RecordKind::did_registration: {
            DidRegistration reg = DidRegistration::from_payload(payload);
            // method-specific id must be the hash of the signing key
            std::string expected =
                encoding::hex_encode(crypto::hash32(reg.signing_public));
            auto pos = reg.did.rfind(':');
            if (pos == std::string::npos || reg.did.substr(pos + 1) != expected) {
                throw ValidationError("did does not match signing key hash");
            }
            break;
        }
        case RecordKind::authorization: {
            AuthorizationRecord rec = AuthorizationRecord::from_payload(payload);
            rec.params.validate();
            if (crypto::hash32(rec.ephemeral_public_key) != rec.pseudo_id) {
                throw ValidationError("pseudo_id does not match ephemeral key");
            }
            if (!crypto::verify(rec.signing_bytes(), rec.posting_signature,
                                {crypto::KeyPurpose::signing,
                                 rec.ephemeral_public_key})) {
                throw ValidationError("authorization posting signature invalid");
            }
            break;
        }
        case RecordKind::revocation: {
            RevocationEntry entry = RevocationEntry::from_payload(payload);
            bool matched = false;
            for (const auto& r : records_) {
                if (r.kind != RecordKind::authorization) continue;
                AuthorizationRecord rec = AuthorizationRecord::from_payload(r.payload);
                if (rec.pseudo_id != entry.revoked_by) continue;
                matched = crypto::verify(
                    entry.signing_bytes(), entry.revocation_signature,
                    {crypto::KeyPurpose::signing, rec.ephemeral_public_key});
                if (matched) break;
            }
            if (!matched) {
                throw ValidationError(
                    "revocation not signed by a registered pseudo identity");
            }
            break;
        }
        case RecordKind::access_event:
            AccessEvent::from_payload(payload);  // structural check
            break;
    }
}

uint64_t Ledger::append(RecordKind kind, const Bytes& payload) {
    std::lock_guard<std::mutex> lock(mutex_);
    validate(kind, payload);
    Record rec;
    rec.seq = records_.size();
    rec.kind = kind;
    rec.payload = payload;
    rec.prev_hash = records_.empty() ? Bytes(32, 0) : records_.back().record_hash;
    rec.record_hash = record_hash_of(rec.seq, kind, payload, rec.prev_hash);
    records_.push_back(rec);
    if (observer_) observer_(records_.back());
    return rec.seq;
}

void Ledger::set_observer(std::function<void(const Record&)> observer) {
    std::lock_guard<std::mutex> lock(mutex_);
    observer_ = std::move(observer);
}

bool Ledger::verify_chain() const {
    std::lock_guard<std::mutex> lock(mutex_);
    Bytes prev(32, 0);
    for (size_t i = 0; i < records_.size(); ++i) {
        const Record& r = records_[i];
        if (r.seq != i) return false;
        if (r.prev_hash != prev) return false;
        if (r.record_hash != record_hash_of(r.seq, r.kind, r.payload, r.prev_hash)) {
            return false;
        }
        prev = r.record_hash;
    }
    return true;
}

size_t Ledger::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_.size();
}

std::vector<Record> Ledger::records() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_;
}

Bytes Ledger::head_hash() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_.empty() ? Bytes(32, 0) : records_.back().record_hash;
}

std::optional<AuthorizationRecord> Ledger::find_authorization(
    const Bytes& pseudo_id, const Bytes& ehr_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
        if (it->kind != RecordKind::authorization) continue;
        AuthorizationRecord rec = AuthorizationRecord::from_payload(it->payload);
        if (rec.pseudo_id == pseudo_id && rec.ehr_id == ehr_id) return rec;
    }
    return std::nullopt;
}

std::optional<DidRegistration> Ledger::find_registration(
    const std::string& did) const {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& r : records_) {  // earliest registration wins
        if (r.kind != RecordKind::did_registration) continue;
        DidRegistration reg = DidRegistration::from_payload(r.payload);
        if (reg.did == did) return reg;
    }
    return std::nullopt;
}

bool Ledger::is_revoked(const Bytes& vc_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& r : records_) {
        if (r.kind != RecordKind::revocation) continue;
        if (RevocationEntry::from_payload(r.payload).vc_id == vc_id) return true;
    }
    return false;
}

std::vector<RevocationEntry> Ledger::revocations() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<RevocationEntry> out;
    for (const auto& r : records_) {
        if (r.kind == RecordKind::revocation) {
            out.push_back(RevocationEntry::from_payload(r.payload));
        }
    }
    return out;
}

std::vector<AccessEvent> Ledger::access_events() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<AccessEvent> out;
    for (const auto& r : records_) {
        if (r.kind == RecordKind::access_event) {
            out.push_back(AccessEvent::from_payload(r.payload));
        }
    }
    return out;
}

std::string Ledger::export_text() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ostringstream os;
    for (const auto& r : records_) {
        json line = {
            {"kind", kind_name(r.kind)},
            {"payload", encoding::hex_encode(r.payload)},
            {"prev_hash", encoding::hex_encode(r.prev_hash)},
            {"record_hash", encoding::hex_encode(r.record_hash)},
            {"seq", r.seq},
        };
        os << line.dump() << "\n";
    }
    return os.str();
}

void Ledger::load_text(const std::string& text) {
    std::vector<Record> loaded;
    std::istringstream is(text);
    std::string line;
    Bytes prev(32, 0);
    uint64_t expected_seq = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(std::string("ledger import parse failure: ") +
                                  e.what());
        }
        Record rec;
        rec.seq = j.at("seq").get<uint64_t>();
        rec.kind = kind_from_name(j.at("kind").get<std::string>());
        rec.payload = encoding::hex_decode(j.at("payload").get<std::string>());
        rec.prev_hash = encoding::hex_decode(j.at("prev_hash").get<std::string>());
        rec.record_hash = encoding::hex_decode(j.at("record_hash").get<std::string>());
        if (rec.seq != expected_seq || rec.prev_hash != prev ||
            rec.record_hash !=
                record_hash_of(rec.seq, rec.kind, rec.payload, rec.prev_hash)) {
            throw ValidationError("ledger import failed chain verification at seq " +
                                  std::to_string(expected_seq));
        }
        prev = rec.record_hash;
        ++expected_seq;
        loaded.push_back(std::move(rec));
    }
    std::lock_guard<std::mutex> lock(mutex_);
    records_ = std::move(loaded);
}

threshold::PartyShares fetch_shares_for(const std::string& recipient_did,
                                        const crypto::KeyPair& encryption_keypair,
                                        const AuthorizationRecord& record) {
    Bytes tag = recipient_tag(recipient_did, record.pseudo_id);
    auto it = record.blinded_shares.find(tag);
    if (it == record.blinded_shares.end()) {
        throw NotFoundError("not a recipient of this authorization record");
    }
    Bytes blob = crypto::pk_decrypt(it->second, encryption_keypair);
    return threshold::PartyShares::deserialize(blob);
}

}  // namespace ehrdeleg::ledger
