#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "feather/bytes.hpp"
#include "feather/header.hpp"
#include "feather/merkle.hpp"

namespace feather {

/// Opaque transaction; the txid is the double hash of the payload.
struct ToyTransaction {
    Bytes payload;
    Hash256 txid;

    static ToyTransaction from_payload(Bytes payload);
    friend bool operator==(const ToyTransaction&, const ToyTransaction&) = default;
};

struct Block {
    BlockHeader header;
    std::vector<ToyTransaction> transactions;

    std::vector<Hash256> txids() const;
    Hash256 hash() const { return header_hash(header); }
    friend bool operator==(const Block&, const Block&) = default;
};

void encode_block(const Block& block, ByteWriter& out);
Block decode_block(ByteSpan raw);

struct SimConfig {
    std::uint64_t seed = 1;
    std::uint32_t compact_target = 0x207fffff;
    std::uint32_t txs_per_block = 4;
    std::uint64_t chain_length = 16;

    /// Throws std::invalid_argument on a zero length or zero target.
    void validate() const;
};

class MiningError : public FeatherError {
public:
    using FeatherError::FeatherError;
};

inline constexpr std::uint32_t kGenesisTimestamp = 1700000000;
inline constexpr std::uint32_t kBlockSpacing = 600;

/// Sequential nonce search from zero. Throws MiningError (NonceExhausted)
/// if no 32-bit nonce satisfies the target.
Block mine_block(const Hash256& parent_hash, std::vector<ToyTransaction> txs,
                 std::uint32_t compact_target, std::uint32_t timestamp);

/// Height-0 block shared by every chain mined at `compact_target`.
Block genesis_block(std::uint32_t compact_target);

/// Deterministic payload set for one block.
std::vector<ToyTransaction> make_block_transactions(std::uint64_t seed, std::uint64_t height,
                                                    std::uint32_t count);

/// Blocks at heights 1..chain_length on top of genesis_block(cfg.compact_target).
std::vector<Block> generate_chain(const SimConfig& cfg);

/// Alternative chain sharing heights 1..fork_height with `chain`. Heights
/// above the fork are re-mined with payloads derived from `seed`, and the
/// result ends `extra_blocks` past the original tip. `fork_height` is a
/// block height in [0, chain.size()].
std::vector<Block> fork_from(const std::vector<Block>& chain, std::uint64_t fork_height,
                             std::uint64_t extra_blocks, std::uint64_t seed);

class NodeError : public FeatherError {
public:
    enum class Kind { NotFound, RangeOutOfBounds };
    NodeError(Kind kind, const std::string& what) : FeatherError(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct TipInfo {
    std::uint64_t height = 0;
    Hash256 hash;
};

struct HeaderAtHeight {
    BlockHeader header;
    std::uint64_t height = 0;
};

struct TxLocation {
    Hash256 block_hash;
    std::uint64_t height = 0;
    MerkleProof proof;
};

/// In-memory full node for the simulated secondary chain.
///
/// Reads take a shared lock; replacing or extending the chain takes the
/// writer lock.
class FullNode {
public:
    FullNode(Block genesis, std::vector<Block> blocks);
    static FullNode from_config(const SimConfig& cfg);

    TipInfo tip() const;
    /// `count` headers starting at `start_height`; empty when count is 0.
    std::vector<BlockHeader> headers(std::uint64_t start_height, std::uint64_t count) const;
    HeaderAtHeight header_by_hash(const Hash256& hash) const;
    TxLocation merkle_proof(const Hash256& txid) const;
    Block block(const Hash256& hash) const;
    Block block_at(std::uint64_t height) const;

    /// Appends blocks on top of the current tip.
    void extend(const std::vector<Block>& blocks);
    /// Replaces everything above genesis.
    void reorg_to(std::vector<Block> blocks);

private:
    void reindex_from(std::size_t height);

    mutable std::shared_mutex mutex_;
    std::vector<Block> blocks_; // index == height, genesis at 0
    std::unordered_map<Hash256, std::uint64_t> by_hash_;
    std::unordered_map<Hash256, std::pair<std::uint64_t, std::uint32_t>> by_txid_;
};

} // namespace feather
