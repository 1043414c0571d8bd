#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "feather/bytes.hpp"
#include "feather/hash.hpp"
#include "feather/header.hpp"

namespace feather {

/// Public side of the batch-validity statement.
struct PublicInputs {
    Hash256 prev_checkpoint_hash;
    Hash256 new_checkpoint_hash;
    std::uint64_t header_count = 0;
    Uint256 accumulated_work = 0;

    static constexpr std::size_t kEncodedSize = 32 + 32 + 8 + 32;
    friend bool operator==(const PublicInputs&, const PublicInputs&) = default;
};

/// prev_hash || new_hash || header_count (u64 LE) || accumulated_work (32 bytes LE).
void encode_public_inputs(const PublicInputs& in, ByteWriter& out);
Bytes encode_public_inputs(const PublicInputs& in);
PublicInputs decode_public_inputs(ByteReader& in);

/// Private side: the header batch itself.
struct Witness {
    std::vector<BlockHeader> headers;
};

struct Proof {
    std::string backend_id;
    Bytes bytes;
    friend bool operator==(const Proof&, const Proof&) = default;
};

void encode_proof(const Proof& proof, ByteWriter& out);
Proof decode_proof(ByteReader& in);

struct ProvingKey {
    std::string backend_id;
    Bytes bytes;
};

struct VerificationKey {
    std::string backend_id;
    Bytes bytes;
    friend bool operator==(const VerificationKey&, const VerificationKey&) = default;
};

Bytes encode_verification_key(const VerificationKey& vk);
VerificationKey decode_verification_key(ByteSpan raw);

struct KeyPair {
    ProvingKey proving_key;
    VerificationKey verification_key;
    Hash256 setup_digest;
};

/// First constraint a witness fails.
enum class WitnessFailure { EmptyBatch, BrokenLink, PowFailure, PublicMismatch, ShapeExceeded };
const char* to_string(WitnessFailure f);

class StatementError : public FeatherError {
public:
    enum class Kind { InvalidWitness, KeyMismatch, UnknownBackend };

    StatementError(Kind kind, const std::string& what) : FeatherError(what), kind_(kind) {}
    StatementError(WitnessFailure failure, std::size_t index);

    Kind kind() const { return kind_; }
    WitnessFailure failure() const { return failure_; }
    std::size_t index() const { return index_; }

private:
    Kind kind_;
    WitnessFailure failure_ = WitnessFailure::PublicMismatch;
    std::size_t index_ = 0;
};

/// Validates the batch and derives its public inputs. Propagates ChainError.
std::pair<PublicInputs, Witness> build_statement(std::span<const BlockHeader> headers,
                                                 const Hash256& prev_checkpoint_hash);

/// Checks every constraint of the statement; throws InvalidWitness naming
/// the first one that fails.
void check_witness(const PublicInputs& pub, const Witness& witness, std::uint64_t max_header_count);

/// Counts primitive operations performed by a verification.
struct VerifyMeter {
    std::uint64_t hash_evaluations = 0;
};

/// A proof system for the batch statement.
class ProofBackend {
public:
    virtual ~ProofBackend() = default;

    virtual std::string_view id() const = 0;
    virtual KeyPair setup(std::uint64_t max_header_count, std::uint64_t entropy_seed) const = 0;
    virtual Proof prove(const ProvingKey& pk, const PublicInputs& pub, const Witness& witness) const = 0;
    /// Never throws; malformed input yields false.
    virtual bool verify(const VerificationKey& vk, const PublicInputs& pub, const Proof& proof,
                        VerifyMeter* meter = nullptr) const = 0;
};

inline constexpr std::string_view kRecomputeBackend = "recompute";
inline constexpr std::string_view kMockBackend = "mock";
inline constexpr std::size_t kSuccinctProofSize = 128;

/// Registered backends: "recompute" and "mock". Throws UnknownBackend.
const ProofBackend& proof_backend(std::string_view id);
std::vector<std::string_view> registered_backends();

KeyPair setup(std::string_view backend_id, std::uint64_t max_header_count, std::uint64_t entropy_seed);
Proof prove(const ProvingKey& pk, const PublicInputs& pub, const Witness& witness);
bool verify(const VerificationKey& vk, const PublicInputs& pub, const Proof& proof,
            VerifyMeter* meter = nullptr);

} // namespace feather
