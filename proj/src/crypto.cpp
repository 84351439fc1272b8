#include "ehrdeleg/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace ehrdeleg::crypto {

namespace {

void ensure_sodium() {
    if (sodium_init() < 0) {
        throw std::runtime_error("libsodium initialization failed");
    }
}

constexpr size_t kBoxNonce = crypto_box_NONCEBYTES;
constexpr size_t kAeadNonce = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;

Bytes blake2b(const Bytes& data, size_t out_len, const Bytes& key) {
    Bytes out(out_len);
    crypto_generichash(out.data(), out_len, data.data(), data.size(),
                       key.empty() ? nullptr : key.data(), key.size());
    return out;
}

// Domain-separated key derivation for sym_encrypt, so the 1-byte toy sk
// still drives a real AEAD.
Bytes derive_aead_key(const BlockCipherKey& key) {
    Bytes input;
    const char* domain = "ehrdeleg.sym.v1";
    input.insert(input.end(), domain, domain + std::strlen(domain));
    input.insert(input.end(), key.key_bytes.begin(), key.key_bytes.end());
    return blake2b(input, crypto_aead_xchacha20poly1305_ietf_KEYBYTES, {});
}

}  // namespace

std::string purpose_name(KeyPurpose p) {
    return p == KeyPurpose::signing ? "signing" : "encryption";
}

const CipherProfile& CipherProfile::production() {
    static const CipherProfile p{"production", 32, 32};
    return p;
}

const CipherProfile& CipherProfile::toy() {
    static const CipherProfile p{"toy", 1, 1};
    return p;
}

const CipherProfile& CipherProfile::by_name(const std::string& name) {
    if (name == "production") return production();
    if (name == "toy") return toy();
    throw ParameterError("unknown cipher profile: " + name);
}

KeyPair generate_signing_keypair(Rng& rng) {
    ensure_sodium();
    Bytes seed = rng.bytes(crypto_sign_SEEDBYTES);
    Bytes pk(crypto_sign_PUBLICKEYBYTES), sk(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(pk.data(), sk.data(), seed.data());
    return KeyPair{KeyPurpose::signing, std::move(pk), std::move(sk)};
}

KeyPair generate_encryption_keypair(Rng& rng) {
    ensure_sodium();
    Bytes seed = rng.bytes(crypto_box_SEEDBYTES);
    Bytes pk(crypto_box_PUBLICKEYBYTES), sk(crypto_box_SECRETKEYBYTES);
    crypto_box_seed_keypair(pk.data(), sk.data(), seed.data());
    return KeyPair{KeyPurpose::encryption, std::move(pk), std::move(sk)};
}

Bytes sign(const Bytes& message, const KeyPair& keypair) {
    ensure_sodium();
    if (keypair.purpose != KeyPurpose::signing) {
        throw PurposeError("sign requires a signing keypair");
    }
    if (keypair.private_key.size() != crypto_sign_SECRETKEYBYTES) {
        throw KeyError("malformed signing private key");
    }
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                         keypair.private_key.data());
    return sig;
}

bool verify(const Bytes& message, const Bytes& signature, const PublicKey& key) {
    ensure_sodium();
    if (key.purpose != KeyPurpose::signing) {
        throw PurposeError("verify requires a signing public key");
    }
    if (key.bytes.size() != crypto_sign_PUBLICKEYBYTES) {
        throw KeyError("malformed signing public key");
    }
    if (signature.size() != crypto_sign_BYTES) {
        return false;
    }
    return crypto_sign_verify_detached(signature.data(), message.data(),
                                       message.size(), key.bytes.data()) == 0;
}

Bytes pk_encrypt(const Bytes& plaintext, const PublicKey& recipient, Rng& rng) {
    ensure_sodium();
    if (recipient.purpose != KeyPurpose::encryption) {
        throw PurposeError("pk_encrypt requires an encryption public key");
    }
    if (recipient.bytes.size() != crypto_box_PUBLICKEYBYTES) {
        throw KeyError("malformed encryption public key");
    }
    // Ephemeral keypair from the injected rng; nonce bound to both public
    // keys, as in the sealed-box construction.
    Bytes seed = rng.bytes(crypto_box_SEEDBYTES);
    Bytes epk(crypto_box_PUBLICKEYBYTES), esk(crypto_box_SECRETKEYBYTES);
    crypto_box_seed_keypair(epk.data(), esk.data(), seed.data());

    Bytes nonce_input(epk);
    nonce_input.insert(nonce_input.end(), recipient.bytes.begin(), recipient.bytes.end());
    Bytes nonce = blake2b(nonce_input, kBoxNonce, {});

    Bytes ct(plaintext.size() + crypto_box_MACBYTES);
    if (crypto_box_easy(ct.data(), plaintext.data(), plaintext.size(), nonce.data(),
                        recipient.bytes.data(), esk.data()) != 0) {
        throw KeyError("public-key encryption failed");
    }
    Bytes out;
    out.reserve(epk.size() + ct.size());
    out.insert(out.end(), epk.begin(), epk.end());
    out.insert(out.end(), ct.begin(), ct.end());
    return out;
}

Bytes pk_decrypt(const Bytes& ciphertext, const KeyPair& recipient) {
    ensure_sodium();
    if (recipient.purpose != KeyPurpose::encryption) {
        throw PurposeError("pk_decrypt requires an encryption keypair");
    }
    if (recipient.private_key.size() != crypto_box_SECRETKEYBYTES) {
        throw KeyError("malformed encryption private key");
    }
    if (ciphertext.size() < crypto_box_PUBLICKEYBYTES + crypto_box_MACBYTES) {
        throw FormatError("ciphertext too short");
    }
    Bytes epk(ciphertext.begin(), ciphertext.begin() + crypto_box_PUBLICKEYBYTES);
    Bytes ct(ciphertext.begin() + crypto_box_PUBLICKEYBYTES, ciphertext.end());

    Bytes nonce_input(epk);
    nonce_input.insert(nonce_input.end(), recipient.public_key.begin(),
                       recipient.public_key.end());
    Bytes nonce = blake2b(nonce_input, kBoxNonce, {});

    Bytes pt(ct.size() - crypto_box_MACBYTES);
    if (crypto_box_open_easy(pt.data(), ct.data(), ct.size(), nonce.data(),
                             epk.data(), recipient.private_key.data()) != 0) {
        throw AuthenticityError("public-key decryption failed");
    }
    return pt;
}

Bytes sym_encrypt(const Bytes& plaintext, const BlockCipherKey& key, Rng& rng) {
    ensure_sodium();
    Bytes aead_key = derive_aead_key(key);
    Bytes nonce = rng.bytes(kAeadNonce);
    Bytes ct(plaintext.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
    unsigned long long ct_len = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt(ct.data(), &ct_len, plaintext.data(),
                                               plaintext.size(), nullptr, 0, nullptr,
                                               nonce.data(), aead_key.data());
    ct.resize(ct_len);
    Bytes out;
    out.reserve(nonce.size() + ct.size());
    out.insert(out.end(), nonce.begin(), nonce.end());
    out.insert(out.end(), ct.begin(), ct.end());
    return out;
}

Bytes sym_decrypt(const Bytes& ciphertext, const BlockCipherKey& key) {
    ensure_sodium();
    if (ciphertext.size() < kAeadNonce + crypto_aead_xchacha20poly1305_ietf_ABYTES) {
        throw FormatError("ciphertext truncated");
    }
    Bytes aead_key = derive_aead_key(key);
    const uint8_t* nonce = ciphertext.data();
    const uint8_t* ct = ciphertext.data() + kAeadNonce;
    size_t ct_len = ciphertext.size() - kAeadNonce;
    Bytes pt(ct_len - crypto_aead_xchacha20poly1305_ietf_ABYTES);
    unsigned long long pt_len = 0;
    if (crypto_aead_xchacha20poly1305_ietf_decrypt(pt.data(), &pt_len, nullptr, ct,
                                                   ct_len, nullptr, 0, nonce,
                                                   aead_key.data()) != 0) {
        throw AuthenticityError("symmetric decryption failed");
    }
    pt.resize(pt_len);
    return pt;
}

Bytes block_encrypt(const Bytes& input, const BlockCipherKey& key,
                    const CipherProfile& profile) {
    if (input.size() != profile.block_width) {
        throw FormatError("block width mismatch");
    }
    if (key.key_bytes.size() != profile.key_width) {
        throw FormatError("key width mismatch");
    }
    if (profile.block_width == 1) {
        return Bytes{static_cast<uint8_t>(input[0] ^ key.key_bytes[0])};
    }
    // Balanced Feistel permutation over 16-byte halves; the round function
    // is BLAKE2b keyed by the cipher key over (round byte || right half).
    const size_t half = profile.block_width / 2;
    Bytes left(input.begin(), input.begin() + static_cast<long>(half));
    Bytes right(input.begin() + static_cast<long>(half), input.end());
    for (uint8_t round = 0; round < 4; ++round) {
        Bytes round_input;
        round_input.push_back(round);
        round_input.insert(round_input.end(), right.begin(), right.end());
        Bytes f = blake2b(round_input, half, key.key_bytes);
        Bytes new_right(half);
        for (size_t i = 0; i < half; ++i) {
            new_right[i] = left[i] ^ f[i];
        }
        left = right;
        right = new_right;
    }
    Bytes out;
    out.reserve(profile.block_width);
    out.insert(out.end(), left.begin(), left.end());
    out.insert(out.end(), right.begin(), right.end());
    return out;
}

Bytes hash32(const Bytes& data) {
    ensure_sodium();
    return blake2b(data, 32, {});
}

Bytes random_block_key(const CipherProfile& profile, Rng& rng) {
    return rng.bytes(profile.key_width);
}

}  // namespace ehrdeleg::crypto
