#pragma once

#include <string>

#include "ehrdeleg/errors.hpp"
#include "ehrdeleg/rng.hpp"

namespace ehrdeleg::crypto {

enum class KeyPurpose { signing, encryption };

std::string purpose_name(KeyPurpose p);

struct KeyPair {
    KeyPurpose purpose;
    Bytes public_key;
    Bytes private_key;
};

struct PublicKey {
    KeyPurpose purpose;
    Bytes bytes;
};

// Two cipher profiles share all combiner logic. The toy profile (1-byte
// block, XOR rule) exists so threshold secrecy is checkable by exhaustive
// enumeration; production is a 32-byte-block keyed permutation.
struct CipherProfile {
    std::string name;
    size_t block_width;
    size_t key_width;

    static const CipherProfile& production();
    static const CipherProfile& toy();
    static const CipherProfile& by_name(const std::string& name);
};

struct BlockCipherKey {
    Bytes key_bytes;
};

KeyPair generate_signing_keypair(Rng& rng);
KeyPair generate_encryption_keypair(Rng& rng);

Bytes sign(const Bytes& message, const KeyPair& keypair);
bool verify(const Bytes& message, const Bytes& signature, const PublicKey& key);

// Sealed-box style hybrid encryption; the ephemeral keypair comes from the
// injected rng so ciphertexts are reproducible under a fixed seed.
Bytes pk_encrypt(const Bytes& plaintext, const PublicKey& recipient, Rng& rng);
Bytes pk_decrypt(const Bytes& ciphertext, const KeyPair& recipient);

// Authenticated symmetric encryption. The AEAD key is derived from
// key.key_bytes by hashing, so both profile widths work.
Bytes sym_encrypt(const Bytes& plaintext, const BlockCipherKey& key, Rng& rng);
Bytes sym_decrypt(const Bytes& ciphertext, const BlockCipherKey& key);

// Bijective in the input for a fixed key. Toy: out = in XOR key byte.
// Production: 4-round Feistel permutation with keyed BLAKE2b rounds.
Bytes block_encrypt(const Bytes& input, const BlockCipherKey& key,
                    const CipherProfile& profile);

Bytes hash32(const Bytes& data);

Bytes random_block_key(const CipherProfile& profile, Rng& rng);

}  // namespace ehrdeleg::crypto
