#include <doctest.h>

#include <random>

#include "feather/crypto.hpp"
#include "feather/merkle.hpp"
#include "support.hpp"

using namespace feather;

namespace {

std::vector<Hash256> random_leaves(std::mt19937_64& rng, std::size_t n)
{
    std::vector<Hash256> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(test::random_hash(rng));
    return v;
}

// Level-by-level recomputation with explicit duplication.
Hash256 reference_root(std::vector<Hash256> level)
{
    while (level.size() > 1) {
        if (level.size() % 2 == 1) level.push_back(level.back());
        std::vector<Hash256> up;
        for (std::size_t i = 0; i < level.size(); i += 2) {
            Bytes cat(level[i].bytes.begin(), level[i].bytes.end());
            cat.insert(cat.end(), level[i + 1].bytes.begin(), level[i + 1].bytes.end());
            up.push_back(double_sha256(cat));
        }
        level = std::move(up);
    }
    return level.front();
}

// Which levels pair index `i` with itself in a tree of `n` leaves.
std::vector<bool> duplicate_levels(std::uint64_t n, std::uint64_t i)
{
    std::vector<bool> out;
    for (std::uint64_t count = n; count > 1; count = (count + 1) / 2, i /= 2) {
        out.push_back(i == count - 1 && count % 2 == 1);
    }
    return out;
}

} // namespace

TEST_SUITE("merkle")
{
    TEST_CASE("root of small trees")
    {
        std::mt19937_64 rng(1);
        const auto l = random_leaves(rng, 2);
        CHECK(merkle_root(std::span(l).first(1)) == l[0]);
        CHECK(merkle_root(l) == merkle_parent(l[0], l[1]));
        Bytes cat(l[0].bytes.begin(), l[0].bytes.end());
        cat.insert(cat.end(), l[1].bytes.begin(), l[1].bytes.end());
        CHECK(merkle_root(l) == double_sha256(cat));
        CHECK_THROWS_AS(merkle_root({}), MerkleError);

        const auto seven = random_leaves(rng, 7);
        CHECK(merkle_root(seven) == reference_root(seven));
    }

    TEST_CASE("depth")
    {
        CHECK(merkle_depth(1) == 0);
        CHECK(merkle_depth(2) == 1);
        CHECK(merkle_depth(3) == 2);
        CHECK(merkle_depth(4) == 2);
        CHECK(merkle_depth(5) == 3);
        CHECK(merkle_depth(64) == 6);
        CHECK(merkle_depth(65) == 7);
    }

    TEST_CASE("proof shapes")
    {
        std::mt19937_64 rng(2);
        const auto one = random_leaves(rng, 1);
        const auto p1 = build_inclusion_proof(one, 0);
        CHECK(p1.siblings.empty());
        CHECK(p1.tree_size == 1);
        CHECK(verify_inclusion(one[0], p1, one[0]));

        const auto two = random_leaves(rng, 2);
        const auto p2 = build_inclusion_proof(two, 1);
        REQUIRE(p2.siblings.size() == 1);
        CHECK(p2.siblings[0] == two[0]);

        CHECK_THROWS_AS(build_inclusion_proof(two, 2), MerkleError);
        CHECK_THROWS_AS(build_inclusion_proof({}, 0), MerkleError);
    }

    TEST_CASE("completeness for sizes 1..64")
    {
        std::mt19937_64 rng(3);
        for (std::size_t n = 1; n <= 64; ++n) {
            const auto leaves = random_leaves(rng, n);
            const Hash256 root = merkle_root(leaves);
            CHECK(root == reference_root(leaves));
            for (std::size_t i = 0; i < n; ++i) {
                const auto p = build_inclusion_proof(leaves, i);
                CHECK(p.siblings.size() == merkle_depth(n));
                CHECK(verify_inclusion(leaves[i], p, root));
            }
        }
    }

    TEST_CASE("every index of an 11-leaf tree verifies")
    {
        std::mt19937_64 rng(4);
        const auto leaves = random_leaves(rng, 11);
        const Hash256 root = merkle_root(leaves);
        for (std::size_t i = 0; i < 11; ++i) CHECK(verify_inclusion(leaves[i], build_inclusion_proof(leaves, i), root));
    }

    TEST_CASE("soundness against single alterations")
    {
        std::mt19937_64 rng(5);
        for (std::size_t n = 2; n <= 24; ++n) {
            const auto leaves = random_leaves(rng, n);
            const Hash256 root = merkle_root(leaves);
            for (std::size_t i = 0; i < n; ++i) {
                const auto p = build_inclusion_proof(leaves, i);
                for (std::size_t s = 0; s < p.siblings.size(); ++s) {
                    auto m = p;
                    m.siblings[s].bytes[rng() % 32] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
                    CHECK_FALSE(verify_inclusion(leaves[i], m, root));
                }
                for (std::uint32_t j = 0; j < n + 2; ++j) {
                    if (j == i) continue;
                    auto m = p;
                    m.leaf_index = j;
                    CHECK_FALSE(verify_inclusion(leaves[i], m, root));
                }
                // A size change is only invisible when the fold is identical.
                const auto dup = duplicate_levels(n, i);
                for (std::uint32_t s = 0; s < 2 * n + 2; ++s) {
                    if (s == n) continue;
                    auto m = p;
                    m.tree_size = s;
                    const bool same_fold = s > i && duplicate_levels(s, i) == dup;
                    CHECK(verify_inclusion(leaves[i], m, root) == same_fold);
                }
                auto extra = p;
                extra.siblings.push_back(root);
                CHECK_FALSE(verify_inclusion(leaves[i], extra, root));
                if (!p.siblings.empty()) {
                    auto fewer = p;
                    fewer.siblings.pop_back();
                    CHECK_FALSE(verify_inclusion(leaves[i], fewer, root));
                }
            }
        }
    }

    TEST_CASE("proof against a different leaf set fails")
    {
        std::mt19937_64 rng(6);
        const auto a = random_leaves(rng, 9);
        const auto b = random_leaves(rng, 9);
        for (std::size_t i = 0; i < 9; ++i) CHECK_FALSE(verify_inclusion(a[i], build_inclusion_proof(a, i), merkle_root(b)));
    }

    TEST_CASE("duplicated last leaf cannot be proven under the shorter tree's root")
    {
        std::mt19937_64 rng(7);
        for (std::size_t n : {3u, 5u, 7u, 9u, 11u, 13u}) {
            const auto leaves = random_leaves(rng, n);
            auto forged = leaves;
            forged.push_back(leaves.back());
            const Hash256 root = merkle_root(leaves);
            bool mutated = false;
            CHECK(merkle_root(forged, &mutated) == root);
            CHECK(mutated);
            bool clean = true;
            merkle_root(leaves, &clean);
            CHECK_FALSE(clean);

            CHECK_FALSE(verify_inclusion(forged[n], build_inclusion_proof(forged, n), root));
            CHECK_FALSE(verify_inclusion(forged[n - 1], build_inclusion_proof(forged, n - 1), root));
            // Claiming the phantom index under the true size is out of range.
            auto phantom = build_inclusion_proof(leaves, n - 1);
            phantom.leaf_index = static_cast<std::uint32_t>(n);
            CHECK_FALSE(verify_inclusion(leaves.back(), phantom, root));
        }
    }

    TEST_CASE("malformed proofs return false")
    {
        std::mt19937_64 rng(8);
        const auto leaves = random_leaves(rng, 4);
        const Hash256 root = merkle_root(leaves);
        MerkleProof p = build_inclusion_proof(leaves, 2);
        p.tree_size = 0;
        CHECK_FALSE(verify_inclusion(leaves[2], p, root));
        p = build_inclusion_proof(leaves, 2);
        p.leaf_index = 4;
        CHECK_FALSE(verify_inclusion(leaves[2], p, root));
    }

    TEST_CASE("proof serialization")
    {
        std::mt19937_64 rng(9);
        const auto leaves = random_leaves(rng, 13);
        const auto p = build_inclusion_proof(leaves, 12);
        const Bytes raw = encode_merkle_proof(p);
        CHECK(raw.size() == 4 + 4 + 2 + 32 * p.siblings.size());
        CHECK(raw[0] == 12);
        CHECK(raw[4] == 13);
        CHECK(raw[8] == p.siblings.size());
        CHECK(decode_merkle_proof(raw) == p);
        Bytes cut(raw.begin(), raw.end() - 1);
        CHECK_THROWS_AS(decode_merkle_proof(cut), DecodeError);
        Bytes longer = raw;
        longer.push_back(0);
        CHECK_THROWS_AS(decode_merkle_proof(longer), DecodeError);
    }
}
