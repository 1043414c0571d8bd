#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "feather/ledger.hpp"
#include "feather/ledger_service.hpp"
#include "feather/node_service.hpp"
#include "feather/statement.hpp"

namespace feather {

struct DaemonConfig {
    std::uint64_t headers_per_proof = 64;
    std::uint64_t proofs_per_tx = 12;
    std::chrono::milliseconds poll_interval{10'000};
    std::string full_node_endpoint;
    std::string ledger_endpoint;
    std::filesystem::path state_path = "featherd.progress";
    std::string backend = std::string(kMockBackend);
    std::uint64_t setup_seed = 1;
    std::string sender = "featherd";

    /// Throws std::invalid_argument if h or k is zero or a full bundle
    /// would exceed the block gas limit.
    void validate(const GasModel& gas) const;
};

/// Durable daemon state.
///
/// `pending_proofs` chain from `last_checkpoint_hash`, the newest checkpoint
/// the ledger is known to have accepted. `submission_in_flight` marks a
/// bundle whose submission was started but whose outcome is not recorded.
struct DaemonProgress {
    std::uint64_t confirmed_height = 0;
    Hash256 last_checkpoint_hash;
    std::vector<BundleItem> pending_proofs;
    bool submission_in_flight = false;

    std::uint64_t last_proven_height() const;
    Hash256 proven_tip_hash() const;
};

/// Canonical encoding followed by a double-SHA-256 of everything before it.
Bytes encode_progress(const DaemonProgress& p);
/// Throws DecodeError on truncation or a failed integrity hash.
DaemonProgress decode_progress(ByteSpan raw);

/// Progress file with atomic replace-on-write.
class ProgressStore {
public:
    explicit ProgressStore(std::filesystem::path path) : path_(std::move(path)) {}

    std::optional<DaemonProgress> load() const;
    void save(const DaemonProgress& p) const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

enum class CrashPoint {
    AfterProofPersisted,
    AfterIntentPersisted,
    AfterSubmit,
    AfterCompletionPersisted,
};

class DaemonError : public FeatherError {
public:
    enum class Kind { FullNodeUnavailable, LedgerUnavailable, LedgerRejected };
    DaemonError(Kind kind, const std::string& what, std::optional<RejectReason> reason = std::nullopt)
        : FeatherError(what), kind_(kind), reason_(reason)
    {
    }
    Kind kind() const { return kind_; }
    std::optional<RejectReason> reason() const { return reason_; }

private:
    Kind kind_;
    std::optional<RejectReason> reason_;
};

struct SyncStats {
    std::uint64_t proofs_generated = 0;
    std::uint64_t bundles_submitted = 0;
    std::uint64_t bundles_accepted = 0;
    std::uint64_t reanchors = 0;
};

/// Polls the full node, proves h-header batches and submits k-proof bundles.
///
/// Persistence is write-ahead: each proof is stored before it is bundled,
/// the submission intent is stored before the bundle is sent, and the
/// outcome is stored before the bundle counts as done. After a restart an
/// in-flight bundle is reconciled against the ledger before anything is
/// resubmitted.
class ProverDaemon {
public:
    ProverDaemon(DaemonConfig config, ProvingKey proving_key, NodeClient& node, LedgerClient& ledger,
                 GasModel gas = {});

    SyncStats sync_step();

    /// Progress as of the last step; loads or anchors on first use.
    const DaemonProgress& progress();
    const SyncStats& totals() const { return totals_; }

    /// Test hook called at each durability boundary; it may throw to
    /// simulate a crash.
    void set_crash_hook(std::function<void(CrashPoint)> hook) { crash_hook_ = std::move(hook); }

    /// Repeats sync_step every poll interval until `stop` is set.
    void run(const std::atomic<bool>& stop, const std::function<void(const std::string&)>& log = {});

private:
    void ensure_loaded();
    void anchor_to_ledger();
    void persist() const;
    void crash(CrashPoint p) const;
    void submit_pending(SyncStats& stats);
    void reconcile_in_flight(SyncStats& stats);
    void commit_pending();

    template <typename F>
    auto node_call(F&& f) -> decltype(f());
    template <typename F>
    auto ledger_call(F&& f) -> decltype(f());

    DaemonConfig config_;
    ProvingKey proving_key_;
    NodeClient& node_;
    LedgerClient& ledger_;
    ProgressStore store_;
    std::optional<DaemonProgress> progress_;
    SyncStats totals_;
    std::function<void(CrashPoint)> crash_hook_;
};

} // namespace feather
