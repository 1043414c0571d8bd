#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "feather/bytes.hpp"
#include "feather/hash.hpp"
#include "feather/statement.hpp"

namespace feather {

/// Linear submission-cost model: base per transaction plus a flat cost per
/// proof, independent of how many headers each proof covers.
struct GasModel {
    std::uint64_t base_cost_per_tx = 35'800;
    std::uint64_t cost_per_proof = 225'138;
    std::uint64_t block_gas_limit = 36'000'000;

    std::uint64_t tx_cost(std::uint64_t proofs) const { return base_cost_per_tx + proofs * cost_per_proof; }
    /// Largest bundle whose cost fits under the block gas limit.
    std::uint64_t max_proofs_per_tx() const;
};

inline constexpr std::uint64_t kMonthlyHeaders = 4320;

/// Gas to checkpoint `monthly_headers` headers with h headers per proof and
/// k proofs per transaction: ceil(M/h) proofs in ceil(p/k) transactions.
std::uint64_t monthly_upkeep_cost(const GasModel& gas, std::uint64_t headers_per_proof,
                                  std::uint64_t proofs_per_tx,
                                  std::uint64_t monthly_headers = kMonthlyHeaders);

struct CheckpointRecord {
    Hash256 checkpoint_hash;
    std::uint64_t height = 0;
    Uint256 cumulative_work = 0;
    Hash256 parent_checkpoint;

    static constexpr std::size_t kEncodedSize = 32 + 8 + 32 + 32;
    friend bool operator==(const CheckpointRecord&, const CheckpointRecord&) = default;
};

void encode_checkpoint_record(const CheckpointRecord& r, ByteWriter& out);
CheckpointRecord decode_checkpoint_record(ByteReader& in);

struct BundleItem {
    PublicInputs public_inputs;
    Proof proof;
};

struct BundleTx {
    std::vector<BundleItem> proofs;
    std::string sender;
};

Bytes encode_bundle(const BundleTx& tx);
BundleTx decode_bundle(ByteSpan raw);

enum class RejectReason {
    EmptyBundle,
    GasLimitExceeded,
    DiscontinuousBundle,
    UnknownPredecessor,
    ProofInvalid,
};
const char* to_string(RejectReason r);
std::optional<RejectReason> reject_reason_from_string(std::string_view s);

struct Receipt {
    Hash256 tx_id;
    bool accepted = false;
    std::uint64_t gas_used = 0;
    Hash256 new_best_tip;
    std::optional<RejectReason> reject_reason;
    /// Offending bundle position for DiscontinuousBundle and ProofInvalid.
    std::uint64_t reject_index = 0;
};

void encode_receipt(const Receipt& r, ByteWriter& out);

struct GasEntry {
    Hash256 tx_id;
    std::uint64_t gas_used = 0;
};

/// Simulated checkpoint-verifier contract.
///
/// Transactions apply one at a time under an exclusive lock; queries run
/// concurrently under a shared lock. Every valid checkpoint is kept,
/// including losing forks, but queries follow the best chain only.
class CheckpointLedger {
public:
    CheckpointLedger(const Hash256& genesis_checkpoint, std::uint64_t genesis_height,
                     VerificationKey verification_key, GasModel gas = {});

    CheckpointLedger(const CheckpointLedger& other);
    CheckpointLedger& operator=(const CheckpointLedger&) = delete;

    Receipt submit_bundle(const BundleTx& tx);

    /// Highest best-chain checkpoint at or below `height`, genesis if none.
    CheckpointRecord closest_checkpoint(std::uint64_t height) const;
    CheckpointRecord latest_checkpoint() const;
    /// Recomputes the maximal-work tip from scratch; ties go to the first accepted.
    Hash256 fork_choice() const;
    Hash256 best_tip() const;

    std::optional<CheckpointRecord> find(const Hash256& hash) const;
    /// Genesis first.
    std::vector<CheckpointRecord> best_chain() const;
    std::size_t record_count() const;
    /// Digest over every stored record and the best tip.
    Hash256 state_digest() const;
    std::vector<GasEntry> gas_ledger() const;

    const GasModel& gas_model() const { return gas_; }
    const VerificationKey& verification_key() const { return verification_key_; }
    const Hash256& genesis_checkpoint() const { return genesis_; }

private:
    struct Entry {
        CheckpointRecord record;
        std::uint64_t accepted_seq = 0;
    };

    void rebuild_best_chain();

    mutable std::shared_mutex mutex_;
    GasModel gas_;
    VerificationKey verification_key_;
    Hash256 genesis_;
    std::unordered_map<Hash256, Entry> records_;
    Hash256 best_tip_;
    std::vector<Hash256> best_chain_; // genesis first
    std::vector<GasEntry> gas_ledger_;
    std::uint64_t next_seq_ = 0;
};

/// Same as constructing a CheckpointLedger; the deployment step.
CheckpointLedger deploy(const Hash256& genesis_checkpoint, std::uint64_t genesis_height,
                        VerificationKey verification_key, GasModel gas = {});

} // namespace feather
