#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "feather/bytes.hpp"
#include "feather/hash.hpp"

namespace feather {

/// 80-byte proof-of-work block header in Bitcoin wire layout.
struct BlockHeader {
    static constexpr std::size_t kSize = 80;

    std::int32_t version = 0;
    Hash256 prev_hash;
    Hash256 merkle_root;
    std::uint32_t timestamp = 0;
    std::uint32_t compact_target = 0;
    std::uint32_t nonce = 0;

    friend bool operator==(const BlockHeader&, const BlockHeader&) = default;
};

using RawHeader = std::array<std::uint8_t, BlockHeader::kSize>;

RawHeader encode_header(const BlockHeader& h);
void encode_header(const BlockHeader& h, ByteWriter& out);
/// Throws DecodeError when `raw` is not exactly 80 bytes.
BlockHeader decode_header(ByteSpan raw);

Hash256 header_hash(const BlockHeader& h);

class TargetError : public FeatherError {
public:
    enum class Kind { Overflow, NegativeTarget };
    TargetError(Kind kind, std::uint32_t bits);
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Expands the nBits field: mantissa * 256^(exponent - 3).
Uint256 decode_compact_target(std::uint32_t bits);
/// Canonical compact form, truncating to three mantissa bytes.
std::uint32_t encode_compact_target(const Uint256& target);

bool hash_meets_target(const Hash256& hash, const Uint256& target);
bool check_pow(const BlockHeader& h);
bool check_link(const BlockHeader& parent, const BlockHeader& child);

/// floor(2^256 / (target + 1)); target 0 saturates at 2^256 - 1.
Uint256 work_from_target(const Uint256& target);
Uint256 header_work(const BlockHeader& h);

struct ChainSummary {
    Hash256 first_hash;
    Hash256 last_hash;
    std::uint64_t header_count = 0;
    Uint256 cumulative_work = 0;

    friend bool operator==(const ChainSummary&, const ChainSummary&) = default;
};

class ChainError : public FeatherError {
public:
    enum class Kind { EmptyBatch, BrokenLink, PowFailure };
    ChainError(Kind kind, std::size_t index);
    Kind kind() const { return kind_; }
    /// Position of the first offending header in the batch.
    std::size_t index() const { return index_; }

private:
    Kind kind_;
    std::size_t index_;
};

const char* to_string(ChainError::Kind kind);

/// Checks linkage from `trusted_prev` and proof of work for every header.
/// Throws ChainError naming the first failure.
ChainSummary validate_chain(std::span<const BlockHeader> headers, const Hash256& trusted_prev);

} // namespace feather
