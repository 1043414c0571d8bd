#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "feather/bytes.hpp"

namespace feather {

/// Unsigned 256-bit integer used for targets and chain work.
using Uint256 = boost::multiprecision::uint256_t;

/// 32 raw digest bytes.
///
/// Bytes are stored in digest output order. Hex display reverses them and
/// ordering treats the bytes as a little-endian 256-bit integer, so that
/// `hash <= target` has the usual proof-of-work meaning.
struct Hash256 {
    static constexpr std::size_t kSize = 32;
    std::array<std::uint8_t, kSize> bytes{};

    static Hash256 from_span(ByteSpan raw);
    /// Parses byte-reversed display hex (64 digits).
    static Hash256 from_hex(std::string_view hex);
    std::string to_hex() const;

    Uint256 to_uint256() const;
    static Hash256 from_uint256(const Uint256& v);

    bool is_zero() const;
    ByteSpan span() const { return {bytes.data(), bytes.size()}; }

    friend bool operator==(const Hash256&, const Hash256&) = default;
    friend std::strong_ordering operator<=>(const Hash256& a, const Hash256& b);
};

/// 32-byte little-endian encoding of a 256-bit integer.
std::array<std::uint8_t, 32> to_le_bytes(const Uint256& v);
Uint256 uint256_from_le(ByteSpan raw);
std::string to_hex_string(const Uint256& v);
/// Parses decimal or 0x-prefixed hex.
Uint256 parse_uint256(std::string_view text);

/// Largest representable 256-bit value.
inline const Uint256& uint256_max()
{
    static const Uint256 max = ~Uint256(0);
    return max;
}

/// Saturating addition at 2^256 - 1.
Uint256 saturating_add(const Uint256& a, const Uint256& b);

} // namespace feather

template <>
struct std::hash<feather::Hash256> {
    std::size_t operator()(const feather::Hash256& h) const noexcept
    {
        std::size_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | h.bytes[i];
        return v;
    }
};
