#include "feather/statement.hpp"

#include <array>

#include "feather/crypto.hpp"

namespace feather {

void encode_public_inputs(const PublicInputs& in, ByteWriter& out)
{
    out.raw(in.prev_checkpoint_hash.span());
    out.raw(in.new_checkpoint_hash.span());
    out.u64(in.header_count);
    out.raw(to_le_bytes(in.accumulated_work));
}

Bytes encode_public_inputs(const PublicInputs& in)
{
    ByteWriter w;
    encode_public_inputs(in, w);
    return std::move(w).take();
}

PublicInputs decode_public_inputs(ByteReader& in)
{
    PublicInputs pub;
    pub.prev_checkpoint_hash = Hash256::from_span(in.raw(32));
    pub.new_checkpoint_hash = Hash256::from_span(in.raw(32));
    pub.header_count = in.u64();
    pub.accumulated_work = uint256_from_le(in.raw(32));
    return pub;
}

void encode_proof(const Proof& proof, ByteWriter& out)
{
    if (proof.backend_id.size() > 255) throw FeatherError("backend id too long");
    out.u8(static_cast<std::uint8_t>(proof.backend_id.size()));
    out.raw(as_bytes(proof.backend_id));
    out.u32(static_cast<std::uint32_t>(proof.bytes.size()));
    out.raw(proof.bytes);
}

Proof decode_proof(ByteReader& in)
{
    Proof proof;
    auto id = in.raw(in.u8());
    proof.backend_id.assign(id.begin(), id.end());
    auto body = in.raw(in.u32());
    proof.bytes.assign(body.begin(), body.end());
    return proof;
}

Bytes encode_verification_key(const VerificationKey& vk)
{
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(vk.backend_id.size()));
    w.raw(as_bytes(vk.backend_id));
    w.u32(static_cast<std::uint32_t>(vk.bytes.size()));
    w.raw(vk.bytes);
    return std::move(w).take();
}

VerificationKey decode_verification_key(ByteSpan raw)
{
    ByteReader r(raw);
    VerificationKey vk;
    auto id = r.raw(r.u8());
    vk.backend_id.assign(id.begin(), id.end());
    auto body = r.raw(r.u32());
    vk.bytes.assign(body.begin(), body.end());
    r.expect_done();
    return vk;
}

const char* to_string(WitnessFailure f)
{
    switch (f) {
    case WitnessFailure::EmptyBatch: return "EmptyBatch";
    case WitnessFailure::BrokenLink: return "BrokenLink";
    case WitnessFailure::PowFailure: return "PowFailure";
    case WitnessFailure::PublicMismatch: return "PublicMismatch";
    case WitnessFailure::ShapeExceeded: return "ShapeExceeded";
    }
    return "?";
}

StatementError::StatementError(WitnessFailure failure, std::size_t index)
    : FeatherError(std::string("InvalidWitness(") + to_string(failure) + " at " + std::to_string(index) + ")"),
      kind_(Kind::InvalidWitness), failure_(failure), index_(index)
{
}

std::pair<PublicInputs, Witness> build_statement(std::span<const BlockHeader> headers,
                                                 const Hash256& prev_checkpoint_hash)
{
    const ChainSummary summary = validate_chain(headers, prev_checkpoint_hash);
    PublicInputs pub{prev_checkpoint_hash, summary.last_hash, summary.header_count,
                     summary.cumulative_work};
    return {pub, Witness{{headers.begin(), headers.end()}}};
}

void check_witness(const PublicInputs& pub, const Witness& witness, std::uint64_t max_header_count)
{
    if (witness.headers.size() > max_header_count) {
        throw StatementError(WitnessFailure::ShapeExceeded, witness.headers.size());
    }
    ChainSummary summary;
    try {
        summary = validate_chain(witness.headers, pub.prev_checkpoint_hash);
    } catch (const ChainError& e) {
        switch (e.kind()) {
        case ChainError::Kind::EmptyBatch: throw StatementError(WitnessFailure::EmptyBatch, 0);
        case ChainError::Kind::BrokenLink: throw StatementError(WitnessFailure::BrokenLink, e.index());
        case ChainError::Kind::PowFailure: throw StatementError(WitnessFailure::PowFailure, e.index());
        }
        throw;
    }
    if (summary.last_hash != pub.new_checkpoint_hash || summary.header_count != pub.header_count ||
        summary.cumulative_work != pub.accumulated_work) {
        throw StatementError(WitnessFailure::PublicMismatch, 0);
    }
}

namespace {

struct KeyHeader {
    Hash256 setup_digest;
    std::uint64_t max_header_count = 0;
};

Hash256 derive_setup_digest(std::string_view backend_id, std::uint64_t max_header_count,
                            std::uint64_t seed)
{
    ByteWriter w;
    w.raw(as_bytes("feather/setup/v1"));
    w.u8(static_cast<std::uint8_t>(backend_id.size()));
    w.raw(as_bytes(backend_id));
    w.u64(max_header_count);
    w.u64(seed);
    return double_sha256(w.bytes());
}

bool public_inputs_well_formed(const PublicInputs& pub, std::uint64_t max_header_count)
{
    return pub.header_count >= 1 && pub.header_count <= max_header_count &&
           pub.accumulated_work >= pub.header_count;
}

/// Proof is the batch itself; verification re-runs header validation.
class RecomputeBackend final : public ProofBackend {
public:
    std::string_view id() const override { return kRecomputeBackend; }

    KeyPair setup(std::uint64_t max_header_count, std::uint64_t seed) const override
    {
        KeyPair kp;
        kp.setup_digest = derive_setup_digest(id(), max_header_count, seed);
        ByteWriter w;
        w.raw(kp.setup_digest.span());
        w.u64(max_header_count);
        kp.proving_key = {std::string(id()), w.bytes()};
        kp.verification_key = {std::string(id()), w.bytes()};
        return kp;
    }

    Proof prove(const ProvingKey& pk, const PublicInputs& pub, const Witness& witness) const override
    {
        const KeyHeader key = parse_key(pk.backend_id, pk.bytes);
        check_witness(pub, witness, key.max_header_count);

        ByteWriter w;
        w.raw(as_bytes(kMagic));
        w.raw(key.setup_digest.span());
        w.u32(static_cast<std::uint32_t>(witness.headers.size()));
        for (const auto& h : witness.headers) encode_header(h, w);
        return {std::string(id()), std::move(w).take()};
    }

    bool verify(const VerificationKey& vk, const PublicInputs& pub, const Proof& proof,
                VerifyMeter* meter) const override
    {
        try {
            if (proof.backend_id != id()) return false;
            const KeyHeader key = parse_key(vk.backend_id, vk.bytes);
            if (!public_inputs_well_formed(pub, key.max_header_count)) return false;

            ByteReader r(proof.bytes);
            auto magic = r.raw(kMagic.size());
            if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) return false;
            if (Hash256::from_span(r.raw(32)) != key.setup_digest) return false;
            const std::uint32_t count = r.u32();
            if (count != pub.header_count) return false;

            Witness witness;
            witness.headers.reserve(count);
            for (std::uint32_t i = 0; i < count; ++i) witness.headers.push_back(decode_header(r.raw(BlockHeader::kSize)));
            r.expect_done();

            if (meter != nullptr) meter->hash_evaluations += count;
            check_witness(pub, witness, key.max_header_count);
            return true;
        } catch (const FeatherError&) {
            return false;
        }
    }

private:
    static constexpr std::string_view kMagic = "FRC1";

    KeyHeader parse_key(const std::string& backend_id, const Bytes& bytes) const
    {
        if (backend_id != id() || bytes.size() != 40) {
            throw StatementError(StatementError::Kind::KeyMismatch, "key is not a recompute-backend key");
        }
        ByteReader r(bytes);
        KeyHeader key;
        key.setup_digest = Hash256::from_span(r.raw(32));
        key.max_header_count = r.u64();
        return key;
    }
};

/// Keyed authenticator over the public inputs.
///
/// Models the size and cost contract of a succinct proof only. Anyone
/// holding the verification key can forge proofs, so soundness questions are
/// answered by the recompute backend.
class MockSuccinctBackend final : public ProofBackend {
public:
    std::string_view id() const override { return kMockBackend; }

    KeyPair setup(std::uint64_t max_header_count, std::uint64_t seed) const override
    {
        KeyPair kp;
        kp.setup_digest = derive_setup_digest(id(), max_header_count, seed);
        ByteWriter sw;
        sw.reserve(64);
        sw.raw(as_bytes("feather/mock-secret/v1"));
        sw.raw(kp.setup_digest.span());
        sw.u64(seed);
        const Hash256 secret = sha256(sw.bytes());

        ByteWriter w;
        w.raw(kp.setup_digest.span());
        w.u64(max_header_count);
        w.raw(secret.span());
        kp.proving_key = {std::string(id()), w.bytes()};
        kp.verification_key = {std::string(id()), w.bytes()};
        return kp;
    }

    Proof prove(const ProvingKey& pk, const PublicInputs& pub, const Witness& witness) const override
    {
        const Key key = parse_key(pk.backend_id, pk.bytes);
        check_witness(pub, witness, key.max_header_count);
        auto tag = authenticate(key, pub, nullptr);
        return {std::string(id()), Bytes(tag.begin(), tag.end())};
    }

    bool verify(const VerificationKey& vk, const PublicInputs& pub, const Proof& proof,
                VerifyMeter* meter) const override
    {
        try {
            if (proof.backend_id != id() || proof.bytes.size() != kSuccinctProofSize) return false;
            const Key key = parse_key(vk.backend_id, vk.bytes);
            if (!public_inputs_well_formed(pub, key.max_header_count)) return false;
            auto expected = authenticate(key, pub, meter);
            return constant_time_equal(expected, proof.bytes);
        } catch (const FeatherError&) {
            return false;
        }
    }

private:
    struct Key {
        Hash256 setup_digest;
        std::uint64_t max_header_count = 0;
        Hash256 secret;
    };

    Key parse_key(const std::string& backend_id, const Bytes& bytes) const
    {
        if (backend_id != id() || bytes.size() != 72) {
            throw StatementError(StatementError::Kind::KeyMismatch, "key is not a mock-backend key");
        }
        ByteReader r(bytes);
        Key key;
        key.setup_digest = Hash256::from_span(r.raw(32));
        key.max_header_count = r.u64();
        key.secret = Hash256::from_span(r.raw(32));
        return key;
    }

    static std::array<std::uint8_t, kSuccinctProofSize> authenticate(const Key& key, const PublicInputs& pub,
                                                                    VerifyMeter* meter)
    {
        std::array<std::uint8_t, kSuccinctProofSize> out{};
        for (std::uint8_t block = 0; block < kSuccinctProofSize / 32; ++block) {
            ByteWriter w;
            w.raw(key.setup_digest.span());
            w.u8(block);
            encode_public_inputs(pub, w);
            const Hash256 mac = hmac_sha256(key.secret.span(), w.bytes());
            std::copy(mac.bytes.begin(), mac.bytes.end(), out.begin() + 32 * block);
            if (meter != nullptr) ++meter->hash_evaluations;
        }
        return out;
    }
};

} // namespace

const ProofBackend& proof_backend(std::string_view id)
{
    static const RecomputeBackend recompute;
    static const MockSuccinctBackend mock;
    if (id == kRecomputeBackend) return recompute;
    if (id == kMockBackend) return mock;
    throw StatementError(StatementError::Kind::UnknownBackend, "unknown proof backend '" + std::string(id) + "'");
}

std::vector<std::string_view> registered_backends() { return {kRecomputeBackend, kMockBackend}; }

KeyPair setup(std::string_view backend_id, std::uint64_t max_header_count, std::uint64_t entropy_seed)
{
    return proof_backend(backend_id).setup(max_header_count, entropy_seed);
}

Proof prove(const ProvingKey& pk, const PublicInputs& pub, const Witness& witness)
{
    const ProofBackend* backend = nullptr;
    try {
        backend = &proof_backend(pk.backend_id);
    } catch (const StatementError&) {
        throw StatementError(StatementError::Kind::KeyMismatch, "proving key names an unknown backend");
    }
    return backend->prove(pk, pub, witness);
}

bool verify(const VerificationKey& vk, const PublicInputs& pub, const Proof& proof, VerifyMeter* meter)
{
    if (vk.backend_id != proof.backend_id) return false;
    try {
        return proof_backend(vk.backend_id).verify(vk, pub, proof, meter);
    } catch (const StatementError&) {
        return false;
    }
}

} // namespace feather
