#pragma once

#include <random>
#include <vector>

#include "feather/chain_sim.hpp"
#include "feather/ledger.hpp"
#include "feather/statement.hpp"

namespace feather::test {

inline std::vector<BlockHeader> headers_of(const std::vector<Block>& blocks)
{
    std::vector<BlockHeader> out;
    for (const auto& b : blocks) out.push_back(b.header);
    return out;
}

inline Hash256 random_hash(std::mt19937_64& rng)
{
    Hash256 h;
    for (auto& b : h.bytes) b = static_cast<std::uint8_t>(rng());
    return h;
}

/// Proves consecutive h-header batches of `chain` starting after `prev` at
/// 0-based block offset `first`.
inline std::vector<BundleItem> prove_batches(const std::vector<Block>& chain, std::size_t first, std::size_t h,
                                             std::size_t batches, const Hash256& prev, const ProvingKey& pk)
{
    std::vector<BundleItem> items;
    Hash256 anchor = prev;
    const auto all = headers_of(chain);
    for (std::size_t i = 0; i < batches; ++i) {
        std::span<const BlockHeader> batch(all.data() + first + i * h, h);
        auto [pub, witness] = build_statement(batch, anchor);
        items.push_back({pub, prove(pk, pub, witness)});
        anchor = pub.new_checkpoint_hash;
    }
    return items;
}

} // namespace feather::test
