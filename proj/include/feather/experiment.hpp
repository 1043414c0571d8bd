#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "feather/chain_sim.hpp"
#include "feather/config.hpp"
#include "feather/daemon.hpp"
#include "feather/ledger.hpp"
#include "feather/ledger_service.hpp"
#include "feather/light_client.hpp"
#include "feather/node_service.hpp"
#include "feather/statement.hpp"

namespace feather {

/// A full node and a freshly deployed ledger, each behind its service and an
/// in-process transport.
class SimulatedNetwork {
public:
    SimulatedNetwork(const SimConfig& sim, std::string_view backend, std::uint64_t headers_per_proof,
                     std::uint64_t setup_seed, GasModel gas = {});
    SimulatedNetwork(const SimulatedNetwork&) = delete;
    SimulatedNetwork& operator=(const SimulatedNetwork&) = delete;

    FullNode& node() { return node_; }
    CheckpointLedger& ledger() { return ledger_; }
    const KeyPair& keys() const { return keys_; }
    const Block& genesis() const { return genesis_; }
    const std::vector<Block>& chain() const { return chain_; }

    NodeClient& node_client() { return node_client_; }
    LedgerClient& ledger_client() { return ledger_client_; }
    InProcessTransport& node_transport() { return node_transport_; }
    InProcessTransport& ledger_transport() { return ledger_transport_; }

private:
    Block genesis_;
    std::vector<Block> chain_;
    FullNode node_;
    KeyPair keys_;
    CheckpointLedger ledger_;
    NodeService node_service_;
    LedgerService ledger_service_;
    InProcessTransport node_transport_;
    InProcessTransport ledger_transport_;
    NodeClient node_client_;
    LedgerClient ledger_client_;
};

/// Unique scratch path under the system temp directory.
std::filesystem::path scratch_path(const std::string& stem);

/// Reference gas measurements for 1-proof .. 176-proof bundles.
struct ReferencePoint {
    std::uint64_t x;
    double value;
};
const std::vector<ReferencePoint>& reference_submission_gas();

struct SubmissionRow {
    std::uint64_t proofs = 0;
    std::uint64_t gas_used = 0;
    bool accepted = false;
    std::string reject_reason;
};

/// Submits real k-proof bundles (2-header proofs) to fresh ledgers.
std::vector<SubmissionRow> run_submission_sweep(const std::vector<std::uint64_t>& proof_counts,
                                                const GasModel& gas, std::string_view backend = kMockBackend);

struct StorageRow {
    std::uint64_t headers_per_proof = 0;
    std::uint64_t checkpoints = 0;
    StorageReport report;
};

/// Checkpoint-only stores holding one record per h headers up to the
/// baseline height, genesis included.
std::vector<StorageRow> run_storage_sweep(const std::vector<std::uint64_t>& batch_sizes,
                                          std::uint64_t spv_baseline_height);

struct EndToEndResult {
    SyncStats daemon;
    std::uint64_t chain_tip_height = 0;
    std::uint64_t ledger_tip_height = 0;
    std::vector<VerificationReport> reports;
};

/// Mines the chain, runs the daemon to quiescence, then verifies one
/// transaction at each query height with a fresh light client.
EndToEndResult run_end_to_end(const SimConfig& sim, const DaemonConfig& daemon,
                              const std::vector<std::uint64_t>& query_heights, const GasModel& gas = {});

struct ForkResult {
    CheckpointRecord original_tip;
    CheckpointRecord fork_tip;
    Hash256 best_tip;
    Hash256 fork_choice;
    bool fork_won = false;
};

/// Proves the original chain, then has a second daemon prove an
/// alternative chain forked at `fork_height` and ending `extra_blocks` past
/// the original tip, against the same ledger.
ForkResult run_fork_scenario(const SimConfig& sim, const DaemonConfig& daemon, std::uint64_t fork_height,
                             std::uint64_t extra_blocks, std::uint64_t fork_seed, const GasModel& gas = {});

/// Scenario description loaded from an experiment file.
struct ExperimentSpec {
    std::string scenario; // submission | upkeep | storage | e2e | fork
    SimConfig sim;
    DaemonConfig daemon;
    GasModel gas;
    std::vector<std::uint64_t> sweep;
    std::vector<std::uint64_t> query_heights;
    std::uint64_t spv_height = 800'000;
    std::uint64_t fork_height = 0;
    std::uint64_t fork_extra = 0;
    std::uint64_t fork_seed = 2;
    /// Metric expectations: "<metric>" (equal within `tolerance`),
    /// "<metric>.min" or "<metric>.max".
    std::map<std::string, double> expect;
    double tolerance = 1e-4;
};

/// Desk-scale defaults for each scenario, as shipped in experiments/.
ExperimentSpec default_experiment(const std::string& scenario);

ExperimentSpec parse_experiment(std::string_view text);
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct MetricsReport {
    std::string text;
    std::map<std::string, double> metrics;
    std::vector<std::string> failed_expectations;
    bool ok() const { return failed_expectations.empty(); }
};

/// Deterministic: the same spec always yields byte-identical text.
MetricsReport run_experiment(const ExperimentSpec& spec);

} // namespace feather
