#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ehrdeleg/credential.hpp"
#include "ehrdeleg/ehr_store.hpp"
#include "ehrdeleg/identity.hpp"
#include "ehrdeleg/ledger.hpp"

namespace ehrdeleg::actors {

enum class Role { data_owner, health_provider, requester, notary, custodian };

std::string role_name(Role r);

enum class Availability {
    do_unavailable,
    do_available_approves,
    do_available_denies,
};

std::string availability_name(Availability a);
Availability availability_from_name(const std::string& name);

struct SecureMessage {
    std::string sender_did;
    std::string recipient_did;
    Bytes payload;           // pk_encrypted for the recipient
    Bytes sender_signature;  // over the encrypted payload
};

struct Notification {
    std::string to_did;  // the issuer (DO)
    Bytes pseudo_id;
    Bytes ehr_id;
    std::string dr_did;
    uint64_t timestamp = 0;
};

struct TranscriptEntry {
    uint64_t index = 0;
    std::string type;  // message | append | oracle | note
    std::map<std::string, std::string> fields;
};

class Transcript {
public:
    void message(const std::string& sender, const std::string& recipient,
                 const std::string& kind, const Bytes& payload_ct);
    void append(uint64_t seq, const std::string& kind);
    void oracle(const std::string& pseudo_hex, const std::string& outcome);
    void note(const std::string& what, std::map<std::string, std::string> fields);

    const std::vector<TranscriptEntry>& entries() const { return entries_; }
    std::string to_jsonl() const;
    Bytes digest() const;

private:
    std::vector<TranscriptEntry> entries_;
};

// One protocol participant: wallet plus whatever verifier memory the role
// retains (the audit scans exactly this retained state).
struct Actor {
    Role role = Role::requester;
    identity::Wallet wallet;

    // notary / custodian session memory
    std::vector<std::string> seen_presentations;
    std::map<threshold::KeyIndexSet, crypto::BlockCipherKey> fetched_keys;
    std::set<Bytes> approved_sessions;  // hash(pseudo || ehr || dr did)
    std::vector<Notification> outbox;   // notary only

    std::string did() const { return wallet.did.to_string(); }
};

struct Delegation {
    Bytes pseudo_id;
    Bytes ehr_id;
    threshold::ThresholdParams params;
    threshold::CombineMode mode = threshold::CombineMode::xor_mode;
    uint64_t expiry = 0;
    std::vector<Bytes> vc_ids;  // one per data requester, in DR order
};

struct AccessOutcome {
    bool granted = false;
    std::string deny_reason;
    Bytes plaintext;
};

struct Coalition {
    bool include_dr = false;
    int dr_index = 0;
    std::vector<int> notary_indices;  // 0-based into the notary list
    bool include_dc = false;
};

enum class CollusionVerdict { sk_recovered, not_recovered };

std::string collusion_verdict_name(CollusionVerdict v);

// Fixed per-role disclosure sets (flows 3d / 3h); the notary set carries
// the full authorization list, the custodian set does not.
const std::set<std::string>& notary_disclosure();
const std::set<std::string>& custodian_disclosure();

// The whole simulated ecosystem: one DO, one HSP, one DC, n-1 notaries and
// any number of DRs sharing a ledger, a store and a logical clock. Message
// delivery is synchronous; every leg is logged to the transcript.
class System {
public:
    System(const crypto::CipherProfile& profile, uint64_t seed);

    void create_actors(int notary_count, int dr_count);

    // flow 1: HSP encrypts and uploads, then hands (sk, ehr_id, DC) to DO.
    Bytes flow1_store_ehr(const Bytes& ehr_plaintext);

    // flow 2: covering shares, cipher key, pseudoID, ledger record, one
    // credential per DR.
    Delegation& flow2_delegate(const Bytes& ehr_id,
                               const threshold::ThresholdParams& params,
                               uint64_t expiry_ticks, threshold::CombineMode mode);

    // flow 3: present to the chosen notaries, then the DC; combine and
    // decrypt the download.
    AccessOutcome flow3_access(
        size_t delegation_index, int dr_index, const std::vector<int>& notary_indices,
        const std::optional<std::set<std::string>>& notary_disclosure_override =
            std::nullopt);

    CollusionVerdict adversary_collude(size_t delegation_index,
                                       const Coalition& coalition);

    // Named STRIDE scenarios; returns the observed rejection label.
    std::string tamper_case(const std::string& name, size_t delegation_index);

    ledger::RevocationEntry revoke_delegation(size_t delegation_index,
                                              size_t credential_index);

    void tick(uint64_t by) { now_ += by; }
    uint64_t now() const { return now_; }

    ledger::Ledger& ledger() { return ledger_; }
    const ledger::Ledger& ledger() const { return ledger_; }
    store::Store& ehr_store() { return store_; }
    Transcript& transcript() { return transcript_; }
    const Transcript& transcript() const { return transcript_; }
    Rng& rng() { return rng_; }
    const crypto::CipherProfile& profile() const { return profile_; }

    Actor& data_owner() { return do_; }
    Actor& health_provider() { return hsp_; }
    Actor& custodian() { return dc_; }
    std::vector<Actor>& notaries() { return notaries_; }
    std::vector<Actor>& requesters() { return drs_; }
    const std::vector<Delegation>& delegations() const { return delegations_; }

    void set_availability_script(std::vector<Availability> script);
    void set_dc_checks_notary_event(bool on) { dc_checks_notary_event_ = on; }
    void set_link_ttl(uint64_t ticks) { link_ttl_ = ticks; }

    std::vector<Bytes> issued_link_tokens() const { return issued_tokens_; }

    SecureMessage seal(const Actor& sender, const std::string& recipient_did,
                       const std::string& kind, const Bytes& plaintext);
    Bytes open(const Actor& recipient, const SecureMessage& msg);

private:
    struct VerifierDecision {
        bool ok = false;
        std::string reason;
        credential::Presentation presentation;
    };

    Actor make_actor(Role role);
    Availability next_availability(const Bytes& pseudo_id);
    uint64_t append_record(ledger::RecordKind kind, const Bytes& payload);
    void append_access_event(const Bytes& pseudo_id, const Bytes& ehr_id,
                             const std::string& actor_did,
                             ledger::AccessEventType type);

    VerifierDecision verifier_round(Actor& verifier, Actor& dr,
                                    const credential::DelegationCredential& cred,
                                    const std::set<std::string>& disclosure,
                                    const std::string& request_kind);

    crypto::CipherProfile profile_;
    Rng rng_;
    uint64_t now_ = 0;
    ledger::Ledger ledger_;
    store::Store store_;
    Transcript transcript_;

    Actor do_;
    Actor hsp_;
    Actor dc_;
    std::vector<Actor> notaries_;
    std::vector<Actor> drs_;
    std::vector<Delegation> delegations_;

    std::vector<Availability> availability_script_;
    size_t availability_cursor_ = 0;
    bool dc_checks_notary_event_ = true;
    uint64_t link_ttl_ = 3600;
    std::vector<Bytes> issued_tokens_;
};

}  // namespace ehrdeleg::actors
