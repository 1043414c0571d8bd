#include "feather/merkle.hpp"

#include <array>
#include <limits>

#include "feather/crypto.hpp"

namespace feather {

std::size_t merkle_depth(std::uint64_t tree_size)
{
    std::size_t depth = 0;
    for (std::uint64_t width = 1; width < tree_size; width *= 2) ++depth;
    return depth;
}

Hash256 merkle_parent(const Hash256& left, const Hash256& right)
{
    std::array<std::uint8_t, 64> buf{};
    std::copy(left.bytes.begin(), left.bytes.end(), buf.begin());
    std::copy(right.bytes.begin(), right.bytes.end(), buf.begin() + 32);
    return double_sha256(buf);
}

Hash256 merkle_root(std::span<const Hash256> leaves, bool* mutated)
{
    if (leaves.empty()) throw MerkleError(MerkleError::Kind::EmptyLeaves, "no Merkle leaves");
    bool saw_mutation = false;
    std::vector<Hash256> level(leaves.begin(), leaves.end());
    while (level.size() > 1) {
        std::vector<Hash256> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) {
            if (i + 1 < level.size()) {
                if (level[i] == level[i + 1]) saw_mutation = true;
                next.push_back(merkle_parent(level[i], level[i + 1]));
            } else {
                next.push_back(merkle_parent(level[i], level[i]));
            }
        }
        level = std::move(next);
    }
    if (mutated != nullptr) *mutated = saw_mutation;
    return level.front();
}

MerkleProof build_inclusion_proof(std::span<const Hash256> leaves, std::size_t index)
{
    if (leaves.empty()) throw MerkleError(MerkleError::Kind::EmptyLeaves, "no Merkle leaves");
    if (index >= leaves.size()) {
        throw MerkleError(MerkleError::Kind::IndexOutOfRange,
                          "leaf index " + std::to_string(index) + " out of range");
    }
    if (leaves.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw MerkleError(MerkleError::Kind::IndexOutOfRange, "tree too large");
    }

    MerkleProof proof;
    proof.leaf_index = static_cast<std::uint32_t>(index);
    proof.tree_size = static_cast<std::uint32_t>(leaves.size());

    std::vector<Hash256> level(leaves.begin(), leaves.end());
    std::size_t pos = index;
    while (level.size() > 1) {
        std::size_t sibling = pos ^ 1;
        proof.siblings.push_back(sibling < level.size() ? level[sibling] : level[pos]);

        std::vector<Hash256> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) {
            const Hash256& right = i + 1 < level.size() ? level[i + 1] : level[i];
            next.push_back(merkle_parent(level[i], right));
        }
        level = std::move(next);
        pos /= 2;
    }
    return proof;
}

bool verify_inclusion(const Hash256& leaf, const MerkleProof& proof, const Hash256& root)
{
    if (proof.tree_size == 0 || proof.leaf_index >= proof.tree_size) return false;
    if (proof.siblings.size() != merkle_depth(proof.tree_size)) return false;

    Hash256 running = leaf;
    std::uint64_t pos = proof.leaf_index;
    std::uint64_t width = proof.tree_size;
    for (const Hash256& sibling : proof.siblings) {
        const bool duplicated = (pos == width - 1) && (width % 2 == 1);
        if (duplicated) {
            // The odd last node is paired with itself.
            if (sibling != running) return false;
            running = merkle_parent(running, running);
        } else {
            // Identical siblings outside the duplication rule indicate a
            // mutated leaf list (L ++ [last(L)]).
            if (sibling == running) return false;
            running = (pos % 2 == 0) ? merkle_parent(running, sibling) : merkle_parent(sibling, running);
        }
        pos /= 2;
        width = (width + 1) / 2;
    }
    return running == root;
}

void encode_merkle_proof(const MerkleProof& proof, ByteWriter& out)
{
    if (proof.siblings.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw FeatherError("Merkle proof too long to encode");
    }
    out.u32(proof.leaf_index);
    out.u32(proof.tree_size);
    out.u16(static_cast<std::uint16_t>(proof.siblings.size()));
    for (const auto& s : proof.siblings) out.raw(s.span());
}

Bytes encode_merkle_proof(const MerkleProof& proof)
{
    ByteWriter w;
    encode_merkle_proof(proof, w);
    return std::move(w).take();
}

MerkleProof decode_merkle_proof(ByteReader& in)
{
    MerkleProof proof;
    proof.leaf_index = in.u32();
    proof.tree_size = in.u32();
    const std::uint16_t count = in.u16();
    proof.siblings.reserve(count);
    for (std::uint16_t i = 0; i < count; ++i) proof.siblings.push_back(Hash256::from_span(in.raw(32)));
    return proof;
}

MerkleProof decode_merkle_proof(ByteSpan raw)
{
    ByteReader r(raw);
    MerkleProof proof = decode_merkle_proof(r);
    r.expect_done();
    return proof;
}

} // namespace feather
