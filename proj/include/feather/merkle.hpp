#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "feather/bytes.hpp"
#include "feather/hash.hpp"

namespace feather {

/// Sibling path proving one leaf under a Bitcoin-style Merkle root.
struct MerkleProof {
    std::uint32_t leaf_index = 0;
    std::uint32_t tree_size = 0;
    std::vector<Hash256> siblings; // bottom-up

    friend bool operator==(const MerkleProof&, const MerkleProof&) = default;
};

class MerkleError : public FeatherError {
public:
    enum class Kind { EmptyLeaves, IndexOutOfRange };
    MerkleError(Kind kind, const std::string& what) : FeatherError(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Number of levels above the leaves: ceil(log2(tree_size)).
std::size_t merkle_depth(std::uint64_t tree_size);

Hash256 merkle_parent(const Hash256& left, const Hash256& right);

/// Odd levels duplicate their last node. `mutated`, when given, is set if
/// two identical sibling nodes were hashed together other than by that rule.
Hash256 merkle_root(std::span<const Hash256> leaves, bool* mutated = nullptr);

MerkleProof build_inclusion_proof(std::span<const Hash256> leaves, std::size_t index);

/// Returns false on any malformed or non-matching proof.
bool verify_inclusion(const Hash256& leaf, const MerkleProof& proof, const Hash256& root);

void encode_merkle_proof(const MerkleProof& proof, ByteWriter& out);
Bytes encode_merkle_proof(const MerkleProof& proof);
MerkleProof decode_merkle_proof(ByteReader& in);
MerkleProof decode_merkle_proof(ByteSpan raw);

} // namespace feather
