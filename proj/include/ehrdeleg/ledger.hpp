#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ehrdeleg/crypto.hpp"
#include "ehrdeleg/threshold.hpp"

namespace ehrdeleg::ledger {

enum class RecordKind : uint8_t {
    did_registration = 0,
    authorization = 1,
    revocation = 2,
    access_event = 3,
};

std::string kind_name(RecordKind k);
RecordKind kind_from_name(const std::string& name);

struct Record {
    uint64_t seq = 0;
    RecordKind kind = RecordKind::did_registration;
    Bytes payload;
    Bytes prev_hash;
    Bytes record_hash;
};

Bytes record_hash_of(uint64_t seq, RecordKind kind, const Bytes& payload,
                     const Bytes& prev_hash);

struct DidRegistration {
    std::string did;
    Bytes signing_public;
    Bytes encryption_public;
    uint64_t created_at = 0;

    Bytes to_payload() const;
    static DidRegistration from_payload(const Bytes& payload);
};

// Delegation record posted under a fresh pseudoID. Recipients locate their
// blinded share blob by tag = hash(recipient_did || pseudo_id); no DO,
// Notary or DC DID appears in the payload.
struct AuthorizationRecord {
    Bytes pseudo_id;             // hash of the ephemeral public key
    Bytes ephemeral_public_key;  // signing key retained in the DO's wallet
    Bytes ehr_id;
    threshold::CombineMode mode = threshold::CombineMode::xor_mode;
    threshold::ThresholdParams params;
    std::map<Bytes, Bytes> blinded_shares;  // recipient_tag -> pk_encrypted blob
    Bytes posting_signature;

    Bytes signing_bytes() const;
    Bytes to_payload() const;
    static AuthorizationRecord from_payload(const Bytes& payload);
};

enum class AccessEventType {
    notary_verified,
    notary_denied,
    dc_verified,
    dc_granted_link,
    download_completed,
};

std::string access_event_name(AccessEventType t);

struct AccessEvent {
    Bytes pseudo_id;
    Bytes ehr_id;
    Bytes actor_tag;  // hash(actor_did || pseudo_id)
    AccessEventType event = AccessEventType::notary_verified;
    uint64_t timestamp = 0;

    Bytes to_payload() const;
    static AccessEvent from_payload(const Bytes& payload);
};

struct RevocationEntry {
    Bytes vc_id;
    Bytes revoked_by;  // pseudo_id
    Bytes revocation_signature;

    Bytes signing_bytes() const;
    Bytes to_payload() const;
    static RevocationEntry from_payload(const Bytes& payload);
};

Bytes recipient_tag(const std::string& recipient_did, const Bytes& pseudo_id);
Bytes actor_tag(const std::string& actor_did, const Bytes& pseudo_id);

// Simulated append-only chain. Appends are linearizable; payloads are
// validated per kind before they are chained.
class Ledger {
public:
    uint64_t append(RecordKind kind, const Bytes& payload);

    // Invoked after every successful append (transcript logging).
    void set_observer(std::function<void(const Record&)> observer);

    bool verify_chain() const;
    size_t size() const;
    std::vector<Record> records() const;
    Bytes head_hash() const;

    std::optional<AuthorizationRecord> find_authorization(const Bytes& pseudo_id,
                                                          const Bytes& ehr_id) const;
    std::optional<DidRegistration> find_registration(const std::string& did) const;
    bool is_revoked(const Bytes& vc_id) const;
    std::vector<RevocationEntry> revocations() const;
    std::vector<AccessEvent> access_events() const;

    std::string export_text() const;
    // Replaces the chain with a validated import; throws on a broken chain.
    void load_text(const std::string& text);

private:
    void validate(RecordKind kind, const Bytes& payload) const;

    mutable std::mutex mutex_;
    std::vector<Record> records_;
    std::function<void(const Record&)> observer_;
};

// Decrypt and parse the caller's blinded share blob from an authorization
// record. Throws NotFoundError when the caller is not a recipient.
threshold::PartyShares fetch_shares_for(const std::string& recipient_did,
                                        const crypto::KeyPair& encryption_keypair,
                                        const AuthorizationRecord& record);

}  // namespace ehrdeleg::ledger
