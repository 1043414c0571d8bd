#include "feather/hash.hpp"

#include <algorithm>

namespace feather {

Hash256 Hash256::from_span(ByteSpan raw)
{
    if (raw.size() != kSize) {
        throw DecodeError("hash must be 32 bytes, got " + std::to_string(raw.size()));
    }
    Hash256 h;
    std::copy(raw.begin(), raw.end(), h.bytes.begin());
    return h;
}

Hash256 Hash256::from_hex(std::string_view hex)
{
    if (hex.size() != 2 * kSize) throw DecodeError("hash hex must be 64 digits");
    Bytes raw = feather::from_hex(hex);
    std::reverse(raw.begin(), raw.end());
    return from_span(raw);
}

std::string Hash256::to_hex() const
{
    std::array<std::uint8_t, kSize> rev = bytes;
    std::reverse(rev.begin(), rev.end());
    return feather::to_hex(rev);
}

Uint256 Hash256::to_uint256() const { return uint256_from_le(span()); }

Hash256 Hash256::from_uint256(const Uint256& v)
{
    Hash256 h;
    h.bytes = to_le_bytes(v);
    return h;
}

bool Hash256::is_zero() const
{
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

std::strong_ordering operator<=>(const Hash256& a, const Hash256& b)
{
    for (std::size_t i = Hash256::kSize; i-- > 0;) {
        if (a.bytes[i] != b.bytes[i]) return a.bytes[i] <=> b.bytes[i];
    }
    return std::strong_ordering::equal;
}

std::array<std::uint8_t, 32> to_le_bytes(const Uint256& v)
{
    std::array<std::uint8_t, 32> out{};
    Uint256 x = v;
    for (auto& b : out) {
        b = static_cast<std::uint8_t>(x & 0xff);
        x >>= 8;
    }
    return out;
}

Uint256 uint256_from_le(ByteSpan raw)
{
    if (raw.size() != 32) throw DecodeError("256-bit integer must be 32 bytes");
    Uint256 v = 0;
    for (std::size_t i = 32; i-- > 0;) {
        v <<= 8;
        v |= raw[i];
    }
    return v;
}

std::string to_hex_string(const Uint256& v)
{
    auto le = to_le_bytes(v);
    std::reverse(le.begin(), le.end());
    std::string hex = feather::to_hex(le);
    auto first = hex.find_first_not_of('0');
    return "0x" + (first == std::string::npos ? std::string("0") : hex.substr(first));
}

Uint256 parse_uint256(std::string_view text)
{
    if (text.empty()) throw DecodeError("empty integer");
    try {
        // cpp_int accepts 0x-prefixed hex and plain decimal.
        boost::multiprecision::cpp_int wide(std::string{text});
        if (wide < 0 || wide > boost::multiprecision::cpp_int(uint256_max())) {
            throw DecodeError("integer out of 256-bit range");
        }
        return Uint256(wide);
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const DecodeError*>(&e) != nullptr) throw;
        throw DecodeError("invalid integer '" + std::string(text) + "'");
    }
}

Uint256 saturating_add(const Uint256& a, const Uint256& b)
{
    Uint256 sum = a + b;
    return sum < a ? uint256_max() : sum;
}

} // namespace feather
