#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ehrdeleg/rng.hpp"

namespace ehrdeleg::encoding {

using Field = std::pair<std::string, Bytes>;
using FieldList = std::vector<Field>;

std::string hex_encode(const Bytes& data);
// Strict: lowercase hex only, even length. Throws FormatError otherwise.
Bytes hex_decode(const std::string& hex);

Bytes be32(uint32_t v);
Bytes be64(uint64_t v);
uint64_t parse_be64(const Bytes& b);

// Deterministic field-map encoding every signature in the system is
// computed over: fields sorted lexicographically by name, each framed as
// 4-byte big-endian name length, name, 4-byte big-endian value length,
// value. Duplicate names are a format error.
Bytes canonical_encode(FieldList fields);
FieldList canonical_decode(const Bytes& data);

inline Bytes str_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }
inline std::string bytes_str(const Bytes& b) { return std::string(b.begin(), b.end()); }

bool contains(const Bytes& haystack, const Bytes& needle);
bool contains(const std::string& haystack, const Bytes& needle);

}  // namespace ehrdeleg::encoding
