#include "feather/header.hpp"

#include <string>

#include "feather/crypto.hpp"

namespace feather {

void encode_header(const BlockHeader& h, ByteWriter& out)
{
    out.i32(h.version);
    out.raw(h.prev_hash.span());
    out.raw(h.merkle_root.span());
    out.u32(h.timestamp);
    out.u32(h.compact_target);
    out.u32(h.nonce);
}

RawHeader encode_header(const BlockHeader& h)
{
    ByteWriter w;
    encode_header(h, w);
    RawHeader raw{};
    std::copy(w.bytes().begin(), w.bytes().end(), raw.begin());
    return raw;
}

BlockHeader decode_header(ByteSpan raw)
{
    if (raw.size() != BlockHeader::kSize) {
        throw DecodeError("header must be 80 bytes, got " + std::to_string(raw.size()));
    }
    ByteReader r(raw);
    BlockHeader h;
    h.version = r.i32();
    h.prev_hash = Hash256::from_span(r.raw(32));
    h.merkle_root = Hash256::from_span(r.raw(32));
    h.timestamp = r.u32();
    h.compact_target = r.u32();
    h.nonce = r.u32();
    return h;
}

Hash256 header_hash(const BlockHeader& h)
{
    RawHeader raw = encode_header(h);
    return double_sha256(raw);
}

namespace {
std::string target_message(TargetError::Kind kind, std::uint32_t bits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "compact target 0x%08x: %s", bits,
                  kind == TargetError::Kind::Overflow ? "overflow" : "negative target");
    return buf;
}
} // namespace

TargetError::TargetError(Kind kind, std::uint32_t bits)
    : FeatherError(target_message(kind, bits)), kind_(kind)
{
}

Uint256 decode_compact_target(std::uint32_t bits)
{
    const unsigned exponent = bits >> 24;
    std::uint32_t word = bits & 0x007fffff;
    if (exponent <= 3) word >>= 8 * (3 - exponent);
    if (word == 0) return 0;
    if ((bits & 0x00800000) != 0) throw TargetError(TargetError::Kind::NegativeTarget, bits);
    if (exponent > 34 || (word > 0xff && exponent > 33) || (word > 0xffff && exponent > 32)) {
        throw TargetError(TargetError::Kind::Overflow, bits);
    }
    if (exponent <= 3) return Uint256(word);
    return Uint256(word) << (8 * (exponent - 3));
}

std::uint32_t encode_compact_target(const Uint256& target)
{
    if (target == 0) return 0;
    unsigned size = (static_cast<unsigned>(boost::multiprecision::msb(target)) + 8) / 8;
    std::uint32_t mantissa = 0;
    if (size <= 3) {
        mantissa = static_cast<std::uint32_t>(target) << (8 * (3 - size));
    } else {
        mantissa = static_cast<std::uint32_t>(target >> (8 * (size - 3)));
    }
    // Keep the sign bit clear by moving one byte into the exponent.
    if ((mantissa & 0x00800000) != 0) {
        mantissa >>= 8;
        ++size;
    }
    return mantissa | (size << 24);
}

bool hash_meets_target(const Hash256& hash, const Uint256& target)
{
    return hash.to_uint256() <= target;
}

bool check_pow(const BlockHeader& h)
{
    return hash_meets_target(header_hash(h), decode_compact_target(h.compact_target));
}

bool check_link(const BlockHeader& parent, const BlockHeader& child)
{
    return child.prev_hash == header_hash(parent);
}

Uint256 work_from_target(const Uint256& target)
{
    if (target == 0) return uint256_max();
    if (target == uint256_max()) return 1;
    // 2^256 / (t + 1) == (2^256 - t - 1) / (t + 1) + 1, and ~t == 2^256 - t - 1.
    return (~target) / (target + 1) + 1;
}

Uint256 header_work(const BlockHeader& h)
{
    return work_from_target(decode_compact_target(h.compact_target));
}

ChainError::ChainError(Kind kind, std::size_t index)
    : FeatherError(std::string(to_string(kind)) + " at header " + std::to_string(index)),
      kind_(kind), index_(index)
{
}

const char* to_string(ChainError::Kind kind)
{
    switch (kind) {
    case ChainError::Kind::EmptyBatch: return "EmptyBatch";
    case ChainError::Kind::BrokenLink: return "BrokenLink";
    case ChainError::Kind::PowFailure: return "PowFailure";
    }
    return "?";
}

ChainSummary validate_chain(std::span<const BlockHeader> headers, const Hash256& trusted_prev)
{
    if (headers.empty()) throw ChainError(ChainError::Kind::EmptyBatch, 0);

    ChainSummary summary;
    Hash256 expected_prev = trusted_prev;
    for (std::size_t i = 0; i < headers.size(); ++i) {
        const BlockHeader& h = headers[i];
        if (h.prev_hash != expected_prev) throw ChainError(ChainError::Kind::BrokenLink, i);

        const Hash256 hash = header_hash(h);
        Uint256 target;
        try {
            target = decode_compact_target(h.compact_target);
        } catch (const TargetError&) {
            throw ChainError(ChainError::Kind::PowFailure, i);
        }
        if (!hash_meets_target(hash, target)) throw ChainError(ChainError::Kind::PowFailure, i);

        if (i == 0) summary.first_hash = hash;
        summary.cumulative_work = saturating_add(summary.cumulative_work, work_from_target(target));
        expected_prev = hash;
    }
    summary.last_hash = expected_prev;
    summary.header_count = headers.size();
    return summary;
}

} // namespace feather
