#include <doctest.h>

#include <random>

#include "feather/chain_sim.hpp"
#include "feather/crypto.hpp"
#include "feather/header.hpp"
#include "support.hpp"

using namespace feather;

namespace {

const char* kGenesisHex =
    "0100000000000000000000000000000000000000000000000000000000000000000000003ba3edfd7a7b12b27ac72c3e67768f617fc81bc3"
    "888a51323a9fb8aa4b1e5e4a29ab5f49ffff001d1dac2b7c";
const char* kGenesisHash = "000000000019d6689c085ae165831e934ff763ae46a2a6c172b3f1b60a8ce26f";
const char* kBlock1Hex =
    "010000006fe28c0ab6f1b372c1a6a246ae63f74f931e8365e15a089c68d6190000000000982051fd1e4ba744bbbe680e1fee14677ba1a3c3"
    "540bf7b1cdb606e857233e0e61bc6649ffff001d01e36299";
const char* kBlock1Hash = "00000000839a8e6886ab5951d76f411475428afc90947ee320161bbf18eb6048";

// Brute-force reference: recompute every hash and compare directly.
bool reference_accepts(const std::vector<BlockHeader>& hs, const Hash256& prev)
{
    if (hs.empty()) return false;
    Hash256 expect = prev;
    for (const auto& h : hs) {
        if (h.prev_hash != expect) return false;
        const auto raw = encode_header(h);
        const Hash256 id = double_sha256(raw);
        Uint256 target;
        try {
            target = decode_compact_target(h.compact_target);
        } catch (const TargetError&) {
            return false;
        }
        if (id.to_uint256() > target) return false;
        expect = id;
    }
    return true;
}

} // namespace

TEST_SUITE("header_core")
{
    TEST_CASE("genesis header decodes and hashes to the known value")
    {
        const Bytes raw = from_hex(kGenesisHex);
        REQUIRE(raw.size() == 80);
        const BlockHeader h = decode_header(raw);
        CHECK(h.version == 1);
        CHECK(h.prev_hash.is_zero());
        CHECK(h.merkle_root.to_hex() == "4a5e1e4baab89f3a32518a88c31bc87f618f76673e2cc77ab2127b7afdeda33b");
        CHECK(h.timestamp == 1231006505);
        CHECK(h.compact_target == 0x1d00ffff);
        CHECK(h.nonce == 2083236893);
        CHECK(header_hash(h).to_hex() == kGenesisHash);
        const auto back = encode_header(h);
        CHECK(Bytes(back.begin(), back.end()) == raw);
        CHECK(check_pow(h));
    }

    TEST_CASE("block 1 links to genesis and carries the minimum-difficulty work")
    {
        const BlockHeader g = decode_header(from_hex(kGenesisHex));
        const BlockHeader b1 = decode_header(from_hex(kBlock1Hex));
        CHECK(header_hash(b1).to_hex() == kBlock1Hash);
        CHECK(check_link(g, b1));
        CHECK_FALSE(check_link(b1, g));
        CHECK_FALSE(check_link(g, g));
        const std::vector<BlockHeader> batch{b1};
        const ChainSummary s = validate_chain(batch, header_hash(g));
        CHECK(s.header_count == 1);
        CHECK(s.first_hash == header_hash(b1));
        CHECK(s.last_hash == header_hash(b1));
        CHECK(s.cumulative_work == Uint256(4295032833ULL));
    }

    TEST_CASE("decode_header rejects wrong lengths and handles all-zero input")
    {
        CHECK_THROWS_AS(decode_header(Bytes(79)), DecodeError);
        CHECK_THROWS_AS(decode_header(Bytes(81)), DecodeError);
        const BlockHeader z = decode_header(Bytes(80));
        CHECK(z == BlockHeader{});
    }

    TEST_CASE("header round-trip over random fields")
    {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 500; ++i) {
            BlockHeader h;
            h.version = static_cast<std::int32_t>(rng());
            h.prev_hash = test::random_hash(rng);
            h.merkle_root = test::random_hash(rng);
            h.timestamp = static_cast<std::uint32_t>(rng());
            h.compact_target = 0x1d00ffff;
            h.nonce = static_cast<std::uint32_t>(rng());
            CHECK(decode_header(encode_header(h)) == h);
        }
    }

    TEST_CASE("every single-bit flip of the encoding changes the hash")
    {
        const RawHeader raw = encode_header(decode_header(from_hex(kGenesisHex)));
        const Hash256 base = double_sha256(raw);
        int changed = 0;
        for (std::size_t bit = 0; bit < 640; ++bit) {
            RawHeader m = raw;
            m[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
            const Hash256 flipped = header_hash(decode_header(m));
            CHECK(flipped == double_sha256(m));
            if (flipped != base) ++changed;
        }
        CHECK(changed == 640);
    }

    TEST_CASE("compact target decoding")
    {
        CHECK(decode_compact_target(0x1d00ffff) == (Uint256(0xffff) << (8 * 26)));
        CHECK(to_hex_string(decode_compact_target(0x1d00ffff)) ==
              "0xffff0000000000000000000000000000000000000000000000000000");
        CHECK(decode_compact_target(0x03000000) == 0);
        CHECK(decode_compact_target(0x04123456) == Uint256(0x12345600));
        CHECK(decode_compact_target(0x207fffff) == (Uint256(0x7fffff) << 232));
        CHECK(decode_compact_target(0x00123456) == 0);
        CHECK(decode_compact_target(0x01003456) == 0);
        CHECK(decode_compact_target(0x01123456) == Uint256(0x12));
        CHECK(decode_compact_target(0x02123456) == Uint256(0x1234));
        CHECK(decode_compact_target(0x03123456) == Uint256(0x123456));
        CHECK(decode_compact_target(0x05009234) == Uint256(0x92340000ULL));
        CHECK(decode_compact_target(0x20123456) == (Uint256(0x123456) << (8 * 29)));
        CHECK(decode_compact_target(0x00923456) == 0);
    }

    TEST_CASE("compact target errors")
    {
        auto kind_of = [](std::uint32_t bits) {
            try {
                decode_compact_target(bits);
            } catch (const TargetError& e) {
                return static_cast<int>(e.kind());
            }
            return -1;
        };
        CHECK(kind_of(0x04923456) == static_cast<int>(TargetError::Kind::NegativeTarget));
        CHECK(kind_of(0x01fedcba) == static_cast<int>(TargetError::Kind::NegativeTarget));
        CHECK(kind_of(0xff123456) == static_cast<int>(TargetError::Kind::Overflow));
        CHECK(kind_of(0x23000100) == static_cast<int>(TargetError::Kind::Overflow));
        CHECK(kind_of(0x22010000) == static_cast<int>(TargetError::Kind::Overflow));
        CHECK(kind_of(0x2200ffff) == static_cast<int>(TargetError::Kind::Overflow));
        CHECK(kind_of(0x21010000) == static_cast<int>(TargetError::Kind::Overflow));
        CHECK(kind_of(0x220000ff) == -1);
        CHECK(kind_of(0x2100ffff) == -1);
        CHECK(kind_of(0x20ffffff) == static_cast<int>(TargetError::Kind::NegativeTarget));
    }

    TEST_CASE("compact target encoding")
    {
        CHECK(encode_compact_target(0) == 0);
        CHECK(encode_compact_target(Uint256(0x12345600)) == 0x04123456u);
        CHECK(encode_compact_target(Uint256(0x12)) == 0x01120000u);
        CHECK(encode_compact_target(Uint256(0x1234)) == 0x02123400u);
        CHECK(encode_compact_target(Uint256(0x80)) == 0x02008000u);
        CHECK(encode_compact_target(Uint256(0x92340000ULL)) == 0x05009234u);
        for (std::uint32_t bits : {0x1d00ffffu, 0x207fffffu, 0x04123456u, 0x1b0404cbu, 0x17053894u, 0x05009234u,
                                   0x20123456u, 0x03123456u}) {
            CHECK(encode_compact_target(decode_compact_target(bits)) == bits);
        }
        // Truncation keeps the largest representable value not above t.
        std::mt19937_64 rng(5);
        for (int i = 0; i < 200; ++i) {
            const Uint256 t = test::random_hash(rng).to_uint256() >> (rng() % 250);
            if (t == 0) continue;
            const Uint256 d = decode_compact_target(encode_compact_target(t));
            CHECK(d <= t);
            // The mantissa keeps whole bytes and at least 16 significant bits.
            const unsigned exponent = encode_compact_target(t) >> 24;
            const unsigned drop = exponent > 3 ? 8 * (exponent - 3) : 0;
            CHECK(d == ((t >> drop) << drop));
            const unsigned top = static_cast<unsigned>(boost::multiprecision::msb(t));
            if (top >= 16) CHECK((t - d) < (Uint256(1) << (top - 15)));
        }
    }

    TEST_CASE("check_pow at boundary targets")
    {
        Block b = mine_block(Hash256{}, make_block_transactions(1, 1, 2), 0x207fffff, kGenesisTimestamp);
        CHECK(check_pow(b.header));
        BlockHeader next = b.header;
        ++next.nonce;
        const bool expected = header_hash(next).to_uint256() <= (Uint256(0x7fffff) << 232);
        CHECK(check_pow(next) == expected);

        std::mt19937_64 rng(2);
        for (int i = 0; i < 32; ++i) CHECK(hash_meets_target(test::random_hash(rng), uint256_max()));
        BlockHeader zero = b.header;
        zero.compact_target = 0;
        CHECK_FALSE(check_pow(zero));
        zero.compact_target = 0x04923456;
        CHECK_THROWS_AS(check_pow(zero), TargetError);
    }

    TEST_CASE("work_from_target")
    {
        CHECK(work_from_target(uint256_max()) == 1);
        CHECK(work_from_target(0) == uint256_max());
        CHECK(work_from_target(1) == (Uint256(1) << 255));
        CHECK(work_from_target(decode_compact_target(0x1d00ffff)) == Uint256(4295032833ULL));
        CHECK(work_from_target(decode_compact_target(0x207fffff)) == 2);
        CHECK(work_from_target(Uint256(1) << 255) == 1);
        CHECK(work_from_target((Uint256(1) << 255) - 1) == 2);

        std::mt19937_64 rng(9);
        std::vector<Uint256> ts;
        for (int i = 0; i < 300; ++i) ts.push_back(test::random_hash(rng).to_uint256() >> (rng() % 256));
        std::sort(ts.begin(), ts.end());
        for (std::size_t i = 1; i < ts.size(); ++i) CHECK(work_from_target(ts[i]) <= work_from_target(ts[i - 1]));
    }

    TEST_CASE("validate_chain on a simulator chain")
    {
        SimConfig cfg;
        cfg.chain_length = 4;
        const Block g = genesis_block(cfg.compact_target);
        auto hs = test::headers_of(generate_chain(cfg));
        const ChainSummary s = validate_chain(hs, g.hash());
        CHECK(s.header_count == 4);
        CHECK(s.cumulative_work == 4 * work_from_target(decode_compact_target(cfg.compact_target)));
        CHECK(s.first_hash == header_hash(hs.front()));
        CHECK(s.last_hash == header_hash(hs.back()));

        CHECK_THROWS_AS(validate_chain({}, g.hash()), ChainError);

        auto broken = hs;
        broken[2].prev_hash.bytes[0] ^= 1;
        try {
            validate_chain(broken, g.hash());
            FAIL("expected BrokenLink");
        } catch (const ChainError& e) {
            CHECK(e.kind() == ChainError::Kind::BrokenLink);
            CHECK(e.index() == 2);
        }

        auto weak = hs;
        while (header_hash(weak[1]).to_uint256() <= decode_compact_target(weak[1].compact_target)) ++weak[1].nonce;
        try {
            validate_chain(weak, g.hash());
            FAIL("expected PowFailure");
        } catch (const ChainError& e) {
            CHECK(e.kind() == ChainError::Kind::PowFailure);
            CHECK(e.index() == 1);
        }

        try {
            validate_chain(hs, hs[0].prev_hash == g.hash() ? Hash256{} : g.hash());
            FAIL("expected BrokenLink");
        } catch (const ChainError& e) {
            CHECK(e.kind() == ChainError::Kind::BrokenLink);
            CHECK(e.index() == 0);
        }
    }

    TEST_CASE("validate_chain agrees with brute force on faulted chains")
    {
        SimConfig cfg;
        cfg.chain_length = 6;
        cfg.txs_per_block = 1;
        const Block g = genesis_block(cfg.compact_target);
        const auto hs = test::headers_of(generate_chain(cfg));
        std::mt19937_64 rng(77);
        int accepted = 0, rejected = 0;
        for (int trial = 0; trial < 400; ++trial) {
            auto m = hs;
            const int faults = static_cast<int>(rng() % 3);
            for (int f = 0; f < faults; ++f) {
                auto raw = encode_header(m[rng() % m.size()]);
                const std::size_t idx = rng() % m.size();
                raw = encode_header(m[idx]);
                raw[rng() % 80] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
                m[idx] = decode_header(raw);
            }
            const std::size_t len = 1 + rng() % m.size();
            m.resize(len);
            const bool ref = reference_accepts(m, g.hash());
            bool ours = true;
            try {
                validate_chain(m, g.hash());
            } catch (const ChainError&) {
                ours = false;
            }
            CHECK(ours == ref);
            (ref ? accepted : rejected)++;
        }
        CHECK(accepted > 0);
        CHECK(rejected > 0);
    }

    TEST_CASE("cumulative work is additive across a batch split")
    {
        SimConfig cfg;
        cfg.chain_length = 12;
        cfg.txs_per_block = 1;
        const Block g = genesis_block(cfg.compact_target);
        const auto hs = test::headers_of(generate_chain(cfg));
        const auto whole = validate_chain(hs, g.hash());
        for (std::size_t cut = 1; cut < hs.size(); ++cut) {
            std::span<const BlockHeader> all(hs);
            const auto a = validate_chain(all.first(cut), g.hash());
            const auto b = validate_chain(all.subspan(cut), a.last_hash);
            CHECK(a.cumulative_work + b.cumulative_work == whole.cumulative_work);
            CHECK(a.header_count + b.header_count == whole.header_count);
        }
    }

    TEST_CASE("hash ordering follows the reversed integer")
    {
        const Hash256 lo = Hash256::from_hex("00000000000000000000000000000000000000000000000000000000000000ff");
        const Hash256 hi = Hash256::from_hex("0100000000000000000000000000000000000000000000000000000000000000");
        CHECK(lo < hi);
        CHECK(lo.bytes[0] == 0xff);
        CHECK(hi.bytes[31] == 0x01);
        CHECK(lo.to_uint256() == 0xff);
        CHECK(Hash256::from_uint256(hi.to_uint256()) == hi);
    }
}
