#pragma once

#include <map>
#include <string>

#include "ehrdeleg/ledger.hpp"

namespace ehrdeleg::store {

struct AccessLink {
    Bytes token;  // 32 bytes
    Bytes ehr_id;
    uint64_t expires_at = 0;
    Bytes issued_to_tag;  // hash(dr_did || token)
};

// The Data Custodian's blob store. It never sees sk or plaintext; its
// serialized state is what the privacy scanners run over.
class Store {
public:
    explicit Store(ledger::Ledger& ledger) : ledger_(ledger) {}

    Bytes upload(const Bytes& ciphertext, const std::string& uploader_did, Rng& rng);

    AccessLink grant_link(const Bytes& ehr_id, const std::string& dr_did,
                          const Bytes& pseudo_id, uint64_t ttl, uint64_t now,
                          Rng& rng);

    // Returns the stored ciphertext and logs a download_completed event.
    Bytes download(const Bytes& token, uint64_t now);

    bool has_blob(const Bytes& ehr_id) const;
    std::string export_json() const;

    // Test hook for the audit-soundness check: plants extra bytes into the
    // exported state.
    void inject_state_for_tests(const std::string& label, const Bytes& data);

    // Tamper-suite hook: XORs 0x01 into one stored ciphertext byte (calling
    // it twice restores the blob).
    void tamper_blob_for_tests(const Bytes& ehr_id, size_t index);

private:
    struct LinkRecord {
        Bytes ehr_id;
        uint64_t expires_at = 0;
        Bytes issued_to_tag;
        Bytes pseudo_id;
        Bytes actor_tag;  // precomputed; the DR's DID is not retained
    };

    ledger::Ledger& ledger_;
    std::map<Bytes, Bytes> blobs_;          // ehr_id -> ciphertext
    std::map<Bytes, std::string> uploaders_;
    std::map<Bytes, LinkRecord> links_;     // token -> link
    std::map<std::string, Bytes> injected_;
};

}  // namespace ehrdeleg::store
