#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ehrdeleg/identity.hpp"
#include "ehrdeleg/ledger.hpp"
#include "ehrdeleg/threshold.hpp"

namespace ehrdeleg::credential {

// Claim names. The cipher key is split across nonce_r / masked_key / params
// so a holder can disclose the nonce without revealing the masked secret.
inline constexpr const char* kClaimIssuer = "issuer_did";
inline constexpr const char* kClaimSubject = "subject_dr_did";
inline constexpr const char* kClaimNotaries = "notary_dids";
inline constexpr const char* kClaimCustodian = "dc_did";
inline constexpr const char* kClaimPseudoId = "pseudo_id";
inline constexpr const char* kClaimEhrId = "ehr_id";
inline constexpr const char* kClaimNonce = "nonce_r";
inline constexpr const char* kClaimMaskedKey = "masked_key";
inline constexpr const char* kClaimParams = "params";
inline constexpr const char* kClaimExpiry = "expiry";
inline constexpr const char* kClaimAuthorizedList = "authorized_dr_dids";

Bytes encode_did_list(const std::vector<std::string>& dids);
std::vector<std::string> decode_did_list(const Bytes& data);

struct DelegationClaims {
    std::string issuer_did;
    std::string subject_dr_did;
    std::vector<std::string> notary_dids;
    std::string dc_did;
    Bytes pseudo_id;
    Bytes ehr_id;
    threshold::CipherKey cipher_key;
    uint64_t expiry = 0;
    std::vector<std::string> authorized_dr_dids;

    std::map<std::string, Bytes> to_claim_map() const;
};

struct DelegationCredential {
    std::string issuer_did;
    std::map<std::string, Bytes> claims;
    std::map<std::string, Bytes> salts;        // 16 bytes per claim
    std::map<std::string, Bytes> commitments;  // hash(salt || claim bytes)
    Bytes issuer_signature;
    Bytes vc_id;

    std::string claim_str(const std::string& name) const;
    threshold::CipherKey cipher_key() const;
    uint64_t expiry() const;

    std::string serialize() const;
    static DelegationCredential deserialize(const std::string& text);
};

struct Presentation {
    std::string issuer_did;
    Bytes issuer_signature;
    std::map<std::string, Bytes> commitments;
    Bytes vc_id;
    // claim name -> (salt, claim bytes); only what the holder disclosed
    std::map<std::string, std::pair<Bytes, Bytes>> disclosed;
    std::string holder_did;
    Bytes holder_challenge_signature;  // over challenge || vc_id

    std::string serialize() const;
    static Presentation deserialize(const std::string& text);
};

enum class RejectReason {
    none,
    bad_signature,
    commitment_mismatch,
    bad_binding,
    expired,
    revoked,
    expiry_not_disclosed,
};

std::string reject_reason_name(RejectReason r);

struct Verdict {
    bool accepted = false;
    RejectReason reason = RejectReason::none;
};

DelegationCredential issue(const identity::Wallet& owner,
                           const DelegationClaims& claims,
                           const ledger::Ledger& ledger, uint64_t now, Rng& rng);

Presentation present(const DelegationCredential& credential,
                     const identity::Wallet& holder,
                     const std::set<std::string>& disclose, const Bytes& challenge);

Verdict verify_presentation(const Presentation& p, const Bytes& challenge,
                            const ledger::Ledger& ledger, uint64_t now);

// Appends a revocation signed by the pseudoID's ephemeral key. Idempotent:
// an already revoked vc_id adds no second entry.
ledger::RevocationEntry revoke(const crypto::KeyPair& pseudo_signing_key,
                               const Bytes& vc_id, ledger::Ledger& ledger);

}  // namespace ehrdeleg::credential
