#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ehrdeleg {

using Bytes = std::vector<uint8_t>;

// Deterministic randomness source. A 64-bit seed fully determines the
// stream; every random draw in the system goes through one of these so
// scenario runs are reproducible byte-for-byte.
class Rng {
public:
    explicit Rng(uint64_t seed);

    Bytes bytes(size_t n);
    uint64_t next_u64();
    uint8_t next_byte();

private:
    std::array<uint8_t, 32> state_;
    uint64_t counter_ = 0;
};

}  // namespace ehrdeleg
