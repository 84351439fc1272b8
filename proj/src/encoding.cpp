#include "ehrdeleg/encoding.hpp"

#include <algorithm>

#include "ehrdeleg/errors.hpp"

namespace ehrdeleg::encoding {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;  // uppercase rejected: one canonical spelling per byte string
}

void append_be32(Bytes& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

uint32_t read_be32(const Bytes& data, size_t pos) {
    return (static_cast<uint32_t>(data[pos]) << 24) |
           (static_cast<uint32_t>(data[pos + 1]) << 16) |
           (static_cast<uint32_t>(data[pos + 2]) << 8) |
           static_cast<uint32_t>(data[pos + 3]);
}

}  // namespace

std::string hex_encode(const Bytes& data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0f]);
    }
    return out;
}

Bytes hex_decode(const std::string& hex) {
    if (hex.size() % 2 != 0) {
        throw FormatError("hex string has odd length");
    }
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]);
        int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) {
            throw FormatError("invalid hex digit");
        }
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

Bytes be32(uint32_t v) {
    Bytes out;
    append_be32(out, v);
    return out;
}

Bytes be64(uint64_t v) {
    Bytes out;
    append_be32(out, static_cast<uint32_t>(v >> 32));
    append_be32(out, static_cast<uint32_t>(v));
    return out;
}

uint64_t parse_be64(const Bytes& b) {
    if (b.size() != 8) {
        throw FormatError("expected 8-byte big-endian integer");
    }
    uint64_t v = 0;
    for (uint8_t byte : b) {
        v = (v << 8) | byte;
    }
    return v;
}

Bytes canonical_encode(FieldList fields) {
    std::sort(fields.begin(), fields.end(),
              [](const Field& a, const Field& b) { return a.first < b.first; });
    for (size_t i = 1; i < fields.size(); ++i) {
        if (fields[i].first == fields[i - 1].first) {
            throw FormatError("duplicate field name: " + fields[i].first);
        }
    }
    Bytes out;
    for (const auto& [name, value] : fields) {
        append_be32(out, static_cast<uint32_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        append_be32(out, static_cast<uint32_t>(value.size()));
        out.insert(out.end(), value.begin(), value.end());
    }
    return out;
}

FieldList canonical_decode(const Bytes& data) {
    FieldList fields;
    size_t pos = 0;
    while (pos < data.size()) {
        if (pos + 4 > data.size()) throw FormatError("truncated field name length");
        uint32_t name_len = read_be32(data, pos);
        pos += 4;
        if (pos + name_len > data.size()) throw FormatError("truncated field name");
        std::string name(data.begin() + static_cast<long>(pos),
                         data.begin() + static_cast<long>(pos + name_len));
        pos += name_len;
        if (pos + 4 > data.size()) throw FormatError("truncated field value length");
        uint32_t value_len = read_be32(data, pos);
        pos += 4;
        if (pos + value_len > data.size()) throw FormatError("truncated field value");
        Bytes value(data.begin() + static_cast<long>(pos),
                    data.begin() + static_cast<long>(pos + value_len));
        pos += value_len;
        fields.emplace_back(std::move(name), std::move(value));
    }
    return fields;
}

bool contains(const Bytes& haystack, const Bytes& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    return std::search(haystack.begin(), haystack.end(), needle.begin(),
                       needle.end()) != haystack.end();
}

bool contains(const std::string& haystack, const Bytes& needle) {
    return contains(Bytes(haystack.begin(), haystack.end()), needle);
}

}  // namespace ehrdeleg::encoding
