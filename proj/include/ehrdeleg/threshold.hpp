#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ehrdeleg/crypto.hpp"

namespace ehrdeleg::threshold {

// Sorted 1-based party indices naming one distributed key. Ordering of
// sets is lexicographic on the index lists.
using KeyIndexSet = std::vector<int>;

std::string index_set_name(const KeyIndexSet& s);
uint16_t index_set_mask(const KeyIndexSet& s);
KeyIndexSet index_set_from_mask(uint16_t mask);

enum class CombineMode { xor_mode, cascade };

std::string mode_name(CombineMode m);
CombineMode mode_from_name(const std::string& name);

struct ThresholdParams {
    int n = 0;  // share-holding parties (notaries + data custodian)
    int t = 0;  // minimum cooperating parties

    void validate() const;  // 1 <= t <= n <= 16
};

// One key per (n-t+1)-subset B of {1..n}; key k_B is held by every party
// in B. Any t parties jointly cover all keys, any t-1 miss at least one.
struct KeyShareSet {
    ThresholdParams params;
    std::vector<KeyIndexSet> key_index_sets;       // lexicographic order
    std::map<KeyIndexSet, crypto::BlockCipherKey> keys;

    std::vector<KeyIndexSet> holdings_of(int party_index) const;
};

// The labeled keys one party holds; what a recipient decrypts from its
// blinded ledger blob.
struct PartyShares {
    int party_index = 0;
    std::map<KeyIndexSet, crypto::BlockCipherKey> keys;

    Bytes serialize() const;
    static PartyShares deserialize(const Bytes& data);
};

struct CipherKey {
    Bytes nonce_r;      // one cipher block
    Bytes masked_key;   // sk XOR pad, sk's width
    ThresholdParams params;
    CombineMode mode = CombineMode::xor_mode;

    Bytes serialize() const;
    static CipherKey deserialize(const Bytes& data);
};

struct PartialContribution {
    int party_index = 0;
    // Per held key: block_count concatenated encrypted blocks.
    std::vector<std::pair<KeyIndexSet, Bytes>> entries;

    Bytes serialize() const;
    static PartialContribution deserialize(const Bytes& data);
};

std::vector<KeyIndexSet> key_index_sets_for(const ThresholdParams& params);

KeyShareSet generate_key_shares(const ThresholdParams& params,
                                const crypto::CipherProfile& profile, Rng& rng);

CipherKey derive_cipher_key(const Bytes& sk, const KeyShareSet& shares,
                            CombineMode mode, const crypto::CipherProfile& profile,
                            Rng& rng);

PartialContribution compute_partial(const PartyShares& shares, const Bytes& nonce_r,
                                    const crypto::CipherProfile& profile,
                                    size_t block_count = 1);

Bytes combine_xor(const CipherKey& cipher_key,
                  const std::vector<PartialContribution>& contributions,
                  const crypto::CipherProfile& profile);

// Asks a cooperating holder to apply block_encrypt under the named key.
// Returns nullopt when no cooperating party holds that key index.
using CascadeStepFn =
    std::function<std::optional<Bytes>(const KeyIndexSet&, const Bytes& block)>;

Bytes combine_cascade(const CipherKey& cipher_key, const CascadeStepFn& step,
                      const crypto::CipherProfile& profile);

enum class SecrecyVerdict { reconstructs, hidden };

// Toy-profile-only information-theoretic check: samples a fresh instance,
// then enumerates the sk candidates consistent with the coalition's keys.
SecrecyVerdict secrecy_oracle(const ThresholdParams& params,
                              const std::vector<int>& coalition,
                              const crypto::CipherProfile& profile, Rng& rng,
                              CombineMode mode = CombineMode::xor_mode);

// Candidate-sk set for a known instance; the enumeration core shared by
// secrecy_oracle and the collusion audit. Toy profile only.
std::vector<uint8_t> consistent_sk_candidates(
    const CipherKey& cipher_key,
    const std::map<KeyIndexSet, crypto::BlockCipherKey>& known_keys,
    const crypto::CipherProfile& profile);

}  // namespace ehrdeleg::threshold
