#include "feather/chain_sim.hpp"

#include <limits>
#include <mutex>
#include <stdexcept>

#include "feather/crypto.hpp"

namespace feather {

ToyTransaction ToyTransaction::from_payload(Bytes payload)
{
    ToyTransaction tx;
    tx.txid = double_sha256(payload);
    tx.payload = std::move(payload);
    return tx;
}

std::vector<Hash256> Block::txids() const
{
    std::vector<Hash256> ids;
    ids.reserve(transactions.size());
    for (const auto& tx : transactions) ids.push_back(tx.txid);
    return ids;
}

void encode_block(const Block& block, ByteWriter& out)
{
    encode_header(block.header, out);
    out.u32(static_cast<std::uint32_t>(block.transactions.size()));
    for (const auto& tx : block.transactions) {
        out.u32(static_cast<std::uint32_t>(tx.payload.size()));
        out.raw(tx.payload);
    }
}

Block decode_block(ByteSpan raw)
{
    ByteReader r(raw);
    Block block;
    block.header = decode_header(r.raw(BlockHeader::kSize));
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        auto payload = r.raw(r.u32());
        block.transactions.push_back(ToyTransaction::from_payload(Bytes(payload.begin(), payload.end())));
    }
    r.expect_done();
    return block;
}

void SimConfig::validate() const
{
    if (chain_length < 1) throw std::invalid_argument("chain_length must be >= 1");
    if (txs_per_block < 1) throw std::invalid_argument("txs_per_block must be >= 1");
    if (decode_compact_target(compact_target) == 0) {
        throw std::invalid_argument("compact_target decodes to zero");
    }
}

Block mine_block(const Hash256& parent_hash, std::vector<ToyTransaction> txs,
                 std::uint32_t compact_target, std::uint32_t timestamp)
{
    const Uint256 target = decode_compact_target(compact_target);
    if (target == 0) throw MiningError("compact target decodes to zero");

    Block block;
    block.transactions = std::move(txs);
    block.header.version = 1;
    block.header.prev_hash = parent_hash;
    block.header.merkle_root = merkle_root(block.txids());
    block.header.timestamp = timestamp;
    block.header.compact_target = compact_target;

    for (std::uint64_t nonce = 0; nonce <= std::numeric_limits<std::uint32_t>::max(); ++nonce) {
        block.header.nonce = static_cast<std::uint32_t>(nonce);
        if (hash_meets_target(header_hash(block.header), target)) return block;
    }
    throw MiningError("NonceExhausted: no 32-bit nonce meets the target");
}

Block genesis_block(std::uint32_t compact_target)
{
    static constexpr std::string_view kGenesisPayload = "feather genesis";
    std::vector<ToyTransaction> txs{
        ToyTransaction::from_payload(Bytes(kGenesisPayload.begin(), kGenesisPayload.end()))};
    return mine_block(Hash256{}, std::move(txs), compact_target, kGenesisTimestamp);
}

std::vector<ToyTransaction> make_block_transactions(std::uint64_t seed, std::uint64_t height,
                                                    std::uint32_t count)
{
    std::vector<ToyTransaction> txs;
    txs.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        ByteWriter w;
        w.u64(seed);
        w.u64(height);
        w.u32(i);
        // Pad with a digest of the identifiers so payloads look like opaque data.
        Hash256 filler = sha256(w.bytes());
        w.raw(filler.span());
        txs.push_back(ToyTransaction::from_payload(std::move(w).take()));
    }
    return txs;
}

namespace {
std::uint32_t timestamp_for(std::uint64_t height)
{
    return kGenesisTimestamp + static_cast<std::uint32_t>(height) * kBlockSpacing;
}

void mine_on_top(std::vector<Block>& chain, Hash256 parent, std::uint64_t from_height,
                 std::uint64_t to_height, std::uint64_t seed, std::uint32_t compact_target,
                 std::uint32_t txs_per_block)
{
    for (std::uint64_t height = from_height; height <= to_height; ++height) {
        Block b = mine_block(parent, make_block_transactions(seed, height, txs_per_block),
                             compact_target, timestamp_for(height));
        parent = b.hash();
        chain.push_back(std::move(b));
    }
}
} // namespace

std::vector<Block> generate_chain(const SimConfig& cfg)
{
    cfg.validate();
    const Block genesis = genesis_block(cfg.compact_target);
    std::vector<Block> chain;
    chain.reserve(cfg.chain_length);
    mine_on_top(chain, genesis.hash(), 1, cfg.chain_length, cfg.seed, cfg.compact_target,
                cfg.txs_per_block);
    return chain;
}

std::vector<Block> fork_from(const std::vector<Block>& chain, std::uint64_t fork_height,
                             std::uint64_t extra_blocks, std::uint64_t seed)
{
    if (chain.empty()) throw std::invalid_argument("cannot fork an empty chain");
    if (fork_height > chain.size()) throw std::invalid_argument("fork height above chain tip");

    const Block& reference = chain.back();
    const std::uint32_t compact_target = reference.header.compact_target;
    const auto txs_per_block = static_cast<std::uint32_t>(reference.transactions.size());

    std::vector<Block> fork(chain.begin(), chain.begin() + static_cast<std::ptrdiff_t>(fork_height));
    const Hash256 parent = fork_height == 0 ? chain.front().header.prev_hash : fork.back().hash();
    mine_on_top(fork, parent, fork_height + 1, chain.size() + extra_blocks, seed, compact_target,
                txs_per_block);
    return fork;
}

FullNode::FullNode(Block genesis, std::vector<Block> blocks)
{
    blocks_.reserve(blocks.size() + 1);
    blocks_.push_back(std::move(genesis));
    for (auto& b : blocks) blocks_.push_back(std::move(b));
    reindex_from(0);
}

FullNode FullNode::from_config(const SimConfig& cfg)
{
    return FullNode(genesis_block(cfg.compact_target), generate_chain(cfg));
}

void FullNode::reindex_from(std::size_t height)
{
    std::erase_if(by_hash_, [&](const auto& kv) { return kv.second >= height; });
    std::erase_if(by_txid_, [&](const auto& kv) { return kv.second.first >= height; });
    for (std::size_t h = height; h < blocks_.size(); ++h) {
        by_hash_[blocks_[h].hash()] = h;
        const auto& txs = blocks_[h].transactions;
        for (std::uint32_t i = 0; i < txs.size(); ++i) by_txid_[txs[i].txid] = {h, i};
    }
}

TipInfo FullNode::tip() const
{
    std::shared_lock lock(mutex_);
    return {blocks_.size() - 1, blocks_.back().hash()};
}

std::vector<BlockHeader> FullNode::headers(std::uint64_t start_height, std::uint64_t count) const
{
    std::shared_lock lock(mutex_);
    if (count == 0) return {};
    if (start_height >= blocks_.size() || count > blocks_.size() - start_height) {
        throw NodeError(NodeError::Kind::RangeOutOfBounds,
                        "headers [" + std::to_string(start_height) + ", +" + std::to_string(count) +
                            ") beyond tip " + std::to_string(blocks_.size() - 1));
    }
    std::vector<BlockHeader> out;
    out.reserve(count);
    for (std::uint64_t h = start_height; h < start_height + count; ++h) out.push_back(blocks_[h].header);
    return out;
}

HeaderAtHeight FullNode::header_by_hash(const Hash256& hash) const
{
    std::shared_lock lock(mutex_);
    auto it = by_hash_.find(hash);
    if (it == by_hash_.end()) throw NodeError(NodeError::Kind::NotFound, "unknown block " + hash.to_hex());
    return {blocks_[it->second].header, it->second};
}

TxLocation FullNode::merkle_proof(const Hash256& txid) const
{
    std::shared_lock lock(mutex_);
    auto it = by_txid_.find(txid);
    if (it == by_txid_.end()) throw NodeError(NodeError::Kind::NotFound, "unknown tx " + txid.to_hex());
    const auto [height, index] = it->second;
    const Block& b = blocks_[height];
    return {b.hash(), height, build_inclusion_proof(b.txids(), index)};
}

Block FullNode::block(const Hash256& hash) const
{
    std::shared_lock lock(mutex_);
    auto it = by_hash_.find(hash);
    if (it == by_hash_.end()) throw NodeError(NodeError::Kind::NotFound, "unknown block " + hash.to_hex());
    return blocks_[it->second];
}

Block FullNode::block_at(std::uint64_t height) const
{
    std::shared_lock lock(mutex_);
    if (height >= blocks_.size()) {
        throw NodeError(NodeError::Kind::RangeOutOfBounds, "height " + std::to_string(height) + " beyond tip");
    }
    return blocks_[height];
}

void FullNode::extend(const std::vector<Block>& blocks)
{
    std::unique_lock lock(mutex_);
    const std::size_t first = blocks_.size();
    for (const auto& b : blocks) {
        if (b.header.prev_hash != blocks_.back().hash()) {
            throw std::invalid_argument("extension does not link to the current tip");
        }
        blocks_.push_back(b);
    }
    reindex_from(first);
}

void FullNode::reorg_to(std::vector<Block> blocks)
{
    std::unique_lock lock(mutex_);
    if (!blocks.empty() && blocks.front().header.prev_hash != blocks_.front().hash()) {
        throw std::invalid_argument("reorg chain does not start at genesis");
    }
    blocks_.resize(1);
    for (auto& b : blocks) blocks_.push_back(std::move(b));
    reindex_from(1);
}

} // namespace feather
