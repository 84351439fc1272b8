#include "ehrdeleg/rng.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace ehrdeleg {

namespace {

void ensure_sodium() {
    if (sodium_init() < 0) {
        throw std::runtime_error("libsodium initialization failed");
    }
}

}  // namespace

Rng::Rng(uint64_t seed) {
    ensure_sodium();
    uint8_t seed_bytes[8];
    for (int i = 0; i < 8; ++i) {
        seed_bytes[i] = static_cast<uint8_t>(seed >> (8 * (7 - i)));
    }
    crypto_generichash(state_.data(), state_.size(), seed_bytes, sizeof(seed_bytes),
                       nullptr, 0);
}

Bytes Rng::bytes(size_t n) {
    // Each draw expands a fresh subseed so draw sizes never shift the stream.
    uint8_t block[40];
    std::memcpy(block, state_.data(), 32);
    for (int i = 0; i < 8; ++i) {
        block[32 + i] = static_cast<uint8_t>(counter_ >> (8 * (7 - i)));
    }
    ++counter_;
    uint8_t subseed[randombytes_SEEDBYTES];
    crypto_generichash(subseed, sizeof(subseed), block, sizeof(block), nullptr, 0);
    Bytes out(n);
    if (n > 0) {
        randombytes_buf_deterministic(out.data(), n, subseed);
    }
    return out;
}

uint64_t Rng::next_u64() {
    Bytes b = bytes(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v = (v << 8) | b[static_cast<size_t>(i)];
    }
    return v;
}

uint8_t Rng::next_byte() { return bytes(1)[0]; }

}  // namespace ehrdeleg
