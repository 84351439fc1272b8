#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "ehrdeleg/crypto.hpp"

using namespace ehrdeleg;
using namespace ehrdeleg::crypto;

namespace {
Bytes msg(const std::string& s) { return Bytes(s.begin(), s.end()); }
}  // namespace

TEST_CASE("sign/verify round trip and rejection") {
    Rng rng(1);
    KeyPair kp = generate_signing_keypair(rng);
    KeyPair other = generate_signing_keypair(rng);
    Bytes m = msg("consent record");
    Bytes s = sign(m, kp);

    CHECK(verify(m, s, {KeyPurpose::signing, kp.public_key}));

    Bytes extended = m;
    extended.push_back(0x00);
    CHECK_FALSE(verify(extended, s, {KeyPurpose::signing, kp.public_key}));

    CHECK_FALSE(verify(m, s, {KeyPurpose::signing, other.public_key}));

    Bytes flipped = s;
    flipped[0] ^= 0x01;
    CHECK_FALSE(verify(m, flipped, {KeyPurpose::signing, kp.public_key}));
}

TEST_CASE("purpose separation is enforced on every attempt") {
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        KeyPair signer = generate_signing_keypair(rng);
        KeyPair box = generate_encryption_keypair(rng);
        CHECK_THROWS_AS(sign(msg("m"), box), PurposeError);
        CHECK_THROWS_AS(pk_encrypt(msg("m"), {KeyPurpose::signing, signer.public_key}, rng),
                        PurposeError);
        CHECK_THROWS_AS(verify(msg("m"), Bytes(64, 0), {KeyPurpose::encryption, box.public_key}),
                        PurposeError);
        CHECK_THROWS_AS(pk_decrypt(Bytes(64, 0), signer), PurposeError);
    }
}

TEST_CASE("pk_encrypt round trips and detects tampering") {
    Rng rng(3);
    KeyPair kp = generate_encryption_keypair(rng);
    PublicKey pub{KeyPurpose::encryption, kp.public_key};

    Bytes empty_ct = pk_encrypt({}, pub, rng);
    CHECK(pk_decrypt(empty_ct, kp) == Bytes{});

    Bytes sk = rng.bytes(32);
    Bytes ct = pk_encrypt(sk, pub, rng);
    CHECK(pk_decrypt(ct, kp) == sk);

    for (size_t i = 0; i < ct.size(); i += 7) {
        Bytes bad = ct;
        bad[i] ^= 0x01;
        CHECK_THROWS_AS(pk_decrypt(bad, kp), AuthenticityError);
    }

    CHECK_THROWS_AS(pk_encrypt(sk, {KeyPurpose::encryption, Bytes(5, 1)}, rng), KeyError);
    CHECK_THROWS_AS(pk_decrypt(Bytes(10, 0), kp), FormatError);
}

TEST_CASE("sym_encrypt is authenticated") {
    Rng rng(4);
    BlockCipherKey key{rng.bytes(32)};
    BlockCipherKey wrong{rng.bytes(32)};
    Bytes payload = rng.bytes(1024);

    Bytes ct = sym_encrypt(payload, key, rng);
    CHECK(sym_decrypt(ct, key) == payload);
    CHECK_THROWS_AS(sym_decrypt(ct, wrong), AuthenticityError);

    Bytes flipped = ct;
    flipped.back() ^= 0x01;
    CHECK_THROWS_AS(sym_decrypt(flipped, key), AuthenticityError);

    Bytes truncated(ct.begin(), ct.begin() + 8);
    CHECK_THROWS_AS(sym_decrypt(truncated, key), FormatError);
}

TEST_CASE("sym round trip across payload sizes up to 1 MiB") {
    Rng rng(5);
    for (size_t size : {size_t{0}, size_t{1}, size_t{255}, size_t{4096},
                        size_t{1} << 20}) {
        BlockCipherKey key{rng.bytes(32)};
        Bytes payload = rng.bytes(size);
        CHECK(sym_decrypt(sym_encrypt(payload, key, rng), key) == payload);
    }
    // toy-width key drives the same AEAD
    BlockCipherKey toy_key{Bytes{0x7f}};
    Bytes p = rng.bytes(100);
    CHECK(sym_decrypt(sym_encrypt(p, toy_key, rng), toy_key) == p);
}

TEST_CASE("toy cipher transparency over all 2^16 pairs") {
    const CipherProfile& toy = CipherProfile::toy();
    for (int input = 0; input < 256; ++input) {
        for (int key = 0; key < 256; ++key) {
            Bytes out = block_encrypt(Bytes{static_cast<uint8_t>(input)},
                                      BlockCipherKey{Bytes{static_cast<uint8_t>(key)}},
                                      toy);
            REQUIRE(out.size() == 1);
            REQUIRE(out[0] == static_cast<uint8_t>(input ^ key));
        }
    }
}

TEST_CASE("toy cipher pinned values") {
    const CipherProfile& toy = CipherProfile::toy();
    CHECK(block_encrypt({0x00}, BlockCipherKey{{0x3c}}, toy) == Bytes{0x3c});
    CHECK(block_encrypt({0x55}, BlockCipherKey{{0x0f}}, toy) == Bytes{0x5a});
}

TEST_CASE("production block cipher is injective (collision scan oracle)") {
    Rng rng(6);
    const CipherProfile& prod = CipherProfile::production();
    BlockCipherKey key{rng.bytes(32)};
    std::set<Bytes> inputs, outputs;
    for (int i = 0; i < 256; ++i) {
        Bytes in = rng.bytes(32);
        if (!inputs.insert(in).second) continue;
        outputs.insert(block_encrypt(in, key, prod));
    }
    CHECK(outputs.size() == inputs.size());
}

TEST_CASE("production block cipher is deterministic and key-dependent") {
    Rng rng(7);
    const CipherProfile& prod = CipherProfile::production();
    BlockCipherKey k1{rng.bytes(32)};
    BlockCipherKey k2{rng.bytes(32)};
    Bytes in = rng.bytes(32);
    CHECK(block_encrypt(in, k1, prod) == block_encrypt(in, k1, prod));
    CHECK(block_encrypt(in, k1, prod) != block_encrypt(in, k2, prod));
}

TEST_CASE("block width mismatch is a format error") {
    Rng rng(8);
    const CipherProfile& prod = CipherProfile::production();
    CHECK_THROWS_AS(block_encrypt(Bytes(16, 0), BlockCipherKey{rng.bytes(32)}, prod),
                    FormatError);
    CHECK_THROWS_AS(block_encrypt(Bytes(32, 0), BlockCipherKey{rng.bytes(16)}, prod),
                    FormatError);
}

TEST_CASE("seeded rng reproduces keys and ciphertexts") {
    Rng a(99), b(99);
    KeyPair ka = generate_signing_keypair(a);
    KeyPair kb = generate_signing_keypair(b);
    CHECK(ka.public_key == kb.public_key);
    CHECK(ka.private_key == kb.private_key);

    KeyPair ea = generate_encryption_keypair(a);
    KeyPair eb = generate_encryption_keypair(b);
    CHECK(pk_encrypt(msg("x"), {KeyPurpose::encryption, ea.public_key}, a) ==
          pk_encrypt(msg("x"), {KeyPurpose::encryption, eb.public_key}, b));

    Rng c(100);
    KeyPair kc = generate_signing_keypair(c);
    CHECK(ka.public_key != kc.public_key);
}
