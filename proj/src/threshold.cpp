#include "ehrdeleg/threshold.hpp"

#include <algorithm>
#include <bitset>
#include <sstream>

#include "ehrdeleg/encoding.hpp"

namespace ehrdeleg::threshold {

namespace encoding = ehrdeleg::encoding;

std::string index_set_name(const KeyIndexSet& s) {
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i > 0) os << ",";
        os << s[i];
    }
    os << "}";
    return os.str();
}

uint16_t index_set_mask(const KeyIndexSet& s) {
    uint16_t mask = 0;
    for (int i : s) {
        mask |= static_cast<uint16_t>(1u << (i - 1));
    }
    return mask;
}

KeyIndexSet index_set_from_mask(uint16_t mask) {
    KeyIndexSet s;
    for (int i = 1; i <= 16; ++i) {
        if (mask & (1u << (i - 1))) s.push_back(i);
    }
    return s;
}

std::string mode_name(CombineMode m) {
    return m == CombineMode::xor_mode ? "xor" : "cascade";
}

CombineMode mode_from_name(const std::string& name) {
    if (name == "xor") return CombineMode::xor_mode;
    if (name == "cascade") return CombineMode::cascade;
    throw ParameterError("unknown combine mode: " + name);
}

void ThresholdParams::validate() const {
    if (n < 1 || t < 1 || t > n || n > 16) {
        throw ParameterError("threshold params require 1 <= t <= n <= 16");
    }
}

namespace {

void subsets_rec(int n, int size, int start, KeyIndexSet& current,
                 std::vector<KeyIndexSet>& out) {
    if (static_cast<int>(current.size()) == size) {
        out.push_back(current);
        return;
    }
    for (int i = start; i <= n; ++i) {
        current.push_back(i);
        subsets_rec(n, size, i + 1, current, out);
        current.pop_back();
    }
}

// nonce for block j: the block counter folded into byte 0 of r.
Bytes nonce_for_block(const Bytes& nonce_r, size_t block_index) {
    Bytes r = nonce_r;
    r[0] ^= static_cast<uint8_t>(block_index);
    return r;
}

void xor_into(Bytes& acc, const Bytes& v) {
    for (size_t i = 0; i < acc.size(); ++i) acc[i] ^= v[i];
}

Bytes pad_for_block(const KeyShareSet& shares, const Bytes& nonce_r,
                    size_t block_index, CombineMode mode,
                    const crypto::CipherProfile& profile) {
    Bytes r = nonce_for_block(nonce_r, block_index);
    if (mode == CombineMode::xor_mode) {
        Bytes pad(profile.block_width, 0);
        for (const auto& b : shares.key_index_sets) {
            xor_into(pad, crypto::block_encrypt(r, shares.keys.at(b), profile));
        }
        return pad;
    }
    Bytes chain = r;
    for (const auto& b : shares.key_index_sets) {
        chain = crypto::block_encrypt(chain, shares.keys.at(b), profile);
    }
    return chain;
}

encoding::FieldList entry_fields(
    const std::vector<std::pair<KeyIndexSet, Bytes>>& entries) {
    encoding::FieldList fields;
    for (const auto& [b, v] : entries) {
        fields.emplace_back(encoding::hex_encode(encoding::be32(index_set_mask(b))),
                            v);
    }
    return fields;
}

std::vector<std::pair<KeyIndexSet, Bytes>> entries_from_fields(
    const encoding::FieldList& fields) {
    std::vector<std::pair<KeyIndexSet, Bytes>> entries;
    for (const auto& [name, value] : fields) {
        Bytes mask_bytes = encoding::hex_decode(name);
        if (mask_bytes.size() != 4) throw FormatError("bad key index label");
        uint16_t mask = static_cast<uint16_t>((mask_bytes[2] << 8) | mask_bytes[3]);
        entries.emplace_back(index_set_from_mask(mask), value);
    }
    return entries;
}

}  // namespace

std::vector<KeyIndexSet> key_index_sets_for(const ThresholdParams& params) {
    params.validate();
    std::vector<KeyIndexSet> out;
    KeyIndexSet current;
    subsets_rec(params.n, params.n - params.t + 1, 1, current, out);
    return out;
}

std::vector<KeyIndexSet> KeyShareSet::holdings_of(int party_index) const {
    std::vector<KeyIndexSet> out;
    for (const auto& b : key_index_sets) {
        if (std::find(b.begin(), b.end(), party_index) != b.end()) {
            out.push_back(b);
        }
    }
    return out;
}

KeyShareSet generate_key_shares(const ThresholdParams& params,
                                const crypto::CipherProfile& profile, Rng& rng) {
    params.validate();
    KeyShareSet shares;
    shares.params = params;
    shares.key_index_sets = key_index_sets_for(params);
    for (const auto& b : shares.key_index_sets) {
        shares.keys[b] = crypto::BlockCipherKey{rng.bytes(profile.key_width)};
    }
    return shares;
}

CipherKey derive_cipher_key(const Bytes& sk, const KeyShareSet& shares,
                            CombineMode mode, const crypto::CipherProfile& profile,
                            Rng& rng) {
    if (shares.key_index_sets.empty() || shares.keys.empty()) {
        throw ParameterError("empty key share set");
    }
    if (sk.empty() || sk.size() % profile.block_width != 0) {
        throw ParameterError("sk width must be a nonzero multiple of the block width");
    }
    size_t blocks = sk.size() / profile.block_width;
    if (blocks > 256) {
        throw ParameterError("sk exceeds the one-byte block counter range");
    }
    CipherKey ck;
    ck.nonce_r = rng.bytes(profile.block_width);
    ck.params = shares.params;
    ck.mode = mode;
    ck.masked_key.resize(sk.size());
    for (size_t j = 0; j < blocks; ++j) {
        Bytes pad = pad_for_block(shares, ck.nonce_r, j, mode, profile);
        for (size_t i = 0; i < profile.block_width; ++i) {
            ck.masked_key[j * profile.block_width + i] =
                sk[j * profile.block_width + i] ^ pad[i];
        }
    }
    return ck;
}

PartialContribution compute_partial(const PartyShares& shares, const Bytes& nonce_r,
                                    const crypto::CipherProfile& profile,
                                    size_t block_count) {
    if (shares.party_index < 1) {
        throw ParameterError("unknown party index");
    }
    if (shares.keys.empty()) {
        throw ParameterError("party holds no keys");
    }
    if (nonce_r.size() != profile.block_width) {
        throw FormatError("nonce width mismatch");
    }
    PartialContribution contribution;
    contribution.party_index = shares.party_index;
    for (const auto& [b, key] : shares.keys) {
        Bytes blocks;
        for (size_t j = 0; j < block_count; ++j) {
            Bytes enc = crypto::block_encrypt(nonce_for_block(nonce_r, j), key, profile);
            blocks.insert(blocks.end(), enc.begin(), enc.end());
        }
        contribution.entries.emplace_back(b, std::move(blocks));
    }
    return contribution;
}

Bytes combine_xor(const CipherKey& cipher_key,
                  const std::vector<PartialContribution>& contributions,
                  const crypto::CipherProfile& profile) {
    if (cipher_key.mode != CombineMode::xor_mode) {
        throw ModeError("cipher key was not derived in xor mode");
    }
    if (contributions.empty()) {
        throw ParameterError("need contributions from at least one party");
    }
    size_t blocks = cipher_key.masked_key.size() / profile.block_width;
    size_t entry_width = blocks * profile.block_width;

    std::vector<KeyIndexSet> expected = key_index_sets_for(cipher_key.params);

    // Dedup by label; overlapping holdings contribute once.
    std::map<KeyIndexSet, Bytes> by_label;
    for (const auto& c : contributions) {
        for (const auto& [b, v] : c.entries) {
            if (std::find(expected.begin(), expected.end(), b) == expected.end()) {
                throw FormatError("unexpected key index label " + index_set_name(b));
            }
            if (v.size() != entry_width) {
                throw FormatError("contribution width mismatch for " +
                                  index_set_name(b));
            }
            auto it = by_label.find(b);
            if (it == by_label.end()) {
                by_label.emplace(b, v);
            } else if (it->second != v) {
                throw InconsistencyError("conflicting contributions for " +
                                         index_set_name(b));
            }
        }
    }

    std::vector<std::string> missing;
    for (const auto& b : expected) {
        if (!by_label.count(b)) missing.push_back(index_set_name(b));
    }
    if (!missing.empty()) {
        std::string msg = "insufficient parties, missing key indices:";
        for (const auto& m : missing) msg += " " + m;
        throw InsufficientPartiesError(msg, missing);
    }

    Bytes sk = cipher_key.masked_key;
    for (const auto& [b, v] : by_label) {
        xor_into(sk, v);
    }
    return sk;
}

Bytes combine_cascade(const CipherKey& cipher_key, const CascadeStepFn& step,
                      const crypto::CipherProfile& profile) {
    if (cipher_key.mode != CombineMode::cascade) {
        throw ModeError("cipher key was not derived in cascade mode");
    }
    size_t blocks = cipher_key.masked_key.size() / profile.block_width;
    std::vector<KeyIndexSet> expected = key_index_sets_for(cipher_key.params);

    Bytes sk = cipher_key.masked_key;
    for (size_t j = 0; j < blocks; ++j) {
        Bytes chain = nonce_for_block(cipher_key.nonce_r, j);
        for (const auto& b : expected) {
            std::optional<Bytes> next = step(b, chain);
            if (!next) {
                throw InsufficientPartiesError(
                    "no cooperating holder for key index " + index_set_name(b),
                    {index_set_name(b)});
            }
            if (next->size() != profile.block_width) {
                throw FormatError("cascade step width mismatch");
            }
            chain = *next;
        }
        for (size_t i = 0; i < profile.block_width; ++i) {
            sk[j * profile.block_width + i] ^= chain[i];
        }
    }
    return sk;
}

std::vector<uint8_t> consistent_sk_candidates(
    const CipherKey& cipher_key,
    const std::map<KeyIndexSet, crypto::BlockCipherKey>& known_keys,
    const crypto::CipherProfile& profile) {
    if (profile.block_width != 1) {
        throw ProfileError("candidate enumeration requires the toy profile");
    }
    if (cipher_key.masked_key.size() != 1) {
        throw ProfileError("candidate enumeration requires a one-block sk");
    }
    std::vector<KeyIndexSet> all = key_index_sets_for(cipher_key.params);
    Bytes r{cipher_key.nonce_r[0]};

    // Reachable pad values over every assignment of the unknown keys.
    // Set-valued walk over the key indices; identical to enumerating all
    // 256^m assignments, without the blowup.
    std::bitset<256> pads;
    if (cipher_key.mode == CombineMode::xor_mode) {
        pads.set(0);
        for (const auto& b : all) {
            std::bitset<256> next;
            auto it = known_keys.find(b);
            if (it != known_keys.end()) {
                uint8_t enc = crypto::block_encrypt(r, it->second, profile)[0];
                for (int p = 0; p < 256; ++p) {
                    if (pads.test(static_cast<size_t>(p))) {
                        next.set(static_cast<size_t>(p ^ enc));
                    }
                }
            } else {
                for (int guess = 0; guess < 256; ++guess) {
                    crypto::BlockCipherKey k{Bytes{static_cast<uint8_t>(guess)}};
                    uint8_t enc = crypto::block_encrypt(r, k, profile)[0];
                    for (int p = 0; p < 256; ++p) {
                        if (pads.test(static_cast<size_t>(p))) {
                            next.set(static_cast<size_t>(p ^ enc));
                        }
                    }
                }
            }
            pads = next;
        }
    } else {
        std::bitset<256> values;
        values.set(r[0]);
        for (const auto& b : all) {
            std::bitset<256> next;
            auto it = known_keys.find(b);
            if (it != known_keys.end()) {
                for (int v = 0; v < 256; ++v) {
                    if (!values.test(static_cast<size_t>(v))) continue;
                    Bytes in{static_cast<uint8_t>(v)};
                    next.set(crypto::block_encrypt(in, it->second, profile)[0]);
                }
            } else {
                for (int v = 0; v < 256; ++v) {
                    if (!values.test(static_cast<size_t>(v))) continue;
                    Bytes in{static_cast<uint8_t>(v)};
                    for (int guess = 0; guess < 256; ++guess) {
                        crypto::BlockCipherKey k{Bytes{static_cast<uint8_t>(guess)}};
                        next.set(crypto::block_encrypt(in, k, profile)[0]);
                    }
                }
            }
            values = next;
        }
        pads = values;
    }

    std::vector<uint8_t> candidates;
    for (int p = 0; p < 256; ++p) {
        if (pads.test(static_cast<size_t>(p))) {
            candidates.push_back(static_cast<uint8_t>(cipher_key.masked_key[0] ^ p));
        }
    }
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

SecrecyVerdict secrecy_oracle(const ThresholdParams& params,
                              const std::vector<int>& coalition,
                              const crypto::CipherProfile& profile, Rng& rng,
                              CombineMode mode) {
    if (profile.block_width != 1 || profile.key_width != 1) {
        throw ProfileError("secrecy oracle runs under the toy profile only");
    }
    params.validate();
    for (int p : coalition) {
        if (p < 1 || p > params.n) {
            throw ParameterError("coalition member out of range");
        }
    }
    KeyShareSet shares = generate_key_shares(params, profile, rng);
    Bytes sk = rng.bytes(1);
    CipherKey ck = derive_cipher_key(sk, shares, mode, profile, rng);

    std::map<KeyIndexSet, crypto::BlockCipherKey> known;
    for (int p : coalition) {
        for (const auto& b : shares.holdings_of(p)) {
            known[b] = shares.keys.at(b);
        }
    }
    std::vector<uint8_t> candidates = consistent_sk_candidates(ck, known, profile);
    if (candidates.size() == 1 && candidates[0] == sk[0]) {
        return SecrecyVerdict::reconstructs;
    }
    if (candidates.size() == 256) {
        return SecrecyVerdict::hidden;
    }
    throw InconsistencyError("secrecy oracle found a partial-information case");
}

Bytes PartyShares::serialize() const {
    std::vector<std::pair<KeyIndexSet, Bytes>> entries;
    for (const auto& [b, k] : keys) entries.emplace_back(b, k.key_bytes);
    return encoding::canonical_encode(
        {{"entries", encoding::canonical_encode(entry_fields(entries))},
         {"party_index", Bytes{static_cast<uint8_t>(party_index)}}});
}

PartyShares PartyShares::deserialize(const Bytes& data) {
    PartyShares out;
    for (const auto& [name, value] : encoding::canonical_decode(data)) {
        if (name == "party_index") {
            if (value.size() != 1) throw FormatError("bad party index");
            out.party_index = value[0];
        } else if (name == "entries") {
            for (auto& [b, v] : entries_from_fields(encoding::canonical_decode(value))) {
                out.keys[b] = crypto::BlockCipherKey{v};
            }
        }
    }
    return out;
}

Bytes CipherKey::serialize() const {
    return encoding::canonical_encode(
        {{"masked_key", masked_key},
         {"mode", Bytes{static_cast<uint8_t>(mode == CombineMode::xor_mode ? 0 : 1)}},
         {"n", Bytes{static_cast<uint8_t>(params.n)}},
         {"nonce_r", nonce_r},
         {"t", Bytes{static_cast<uint8_t>(params.t)}}});
}

CipherKey CipherKey::deserialize(const Bytes& data) {
    CipherKey out;
    for (const auto& [name, value] : encoding::canonical_decode(data)) {
        if (name == "masked_key") {
            out.masked_key = value;
        } else if (name == "mode") {
            if (value.size() != 1 || value[0] > 1) throw FormatError("bad mode");
            out.mode = value[0] == 0 ? CombineMode::xor_mode : CombineMode::cascade;
        } else if (name == "n") {
            if (value.size() != 1) throw FormatError("bad n");
            out.params.n = value[0];
        } else if (name == "nonce_r") {
            out.nonce_r = value;
        } else if (name == "t") {
            if (value.size() != 1) throw FormatError("bad t");
            out.params.t = value[0];
        }
    }
    out.params.validate();
    if (out.nonce_r.empty() || out.masked_key.empty()) {
        throw FormatError("cipher key missing nonce or masked key");
    }
    return out;
}

Bytes PartialContribution::serialize() const {
    return encoding::canonical_encode(
        {{"entries", encoding::canonical_encode(entry_fields(entries))},
         {"party_index", Bytes{static_cast<uint8_t>(party_index)}}});
}

PartialContribution PartialContribution::deserialize(const Bytes& data) {
    PartialContribution out;
    for (const auto& [name, value] : encoding::canonical_decode(data)) {
        if (name == "party_index") {
            if (value.size() != 1) throw FormatError("bad party index");
            out.party_index = value[0];
        } else if (name == "entries") {
            out.entries = entries_from_fields(encoding::canonical_decode(value));
        }
    }
    return out;
}

}  // namespace ehrdeleg::threshold
