#include "feather/daemon.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <thread>

#include "feather/crypto.hpp"

namespace feather {

void DaemonConfig::validate(const GasModel& gas) const
{
    if (headers_per_proof < 1) throw std::invalid_argument("headers_per_proof must be >= 1");
    if (proofs_per_tx < 1) throw std::invalid_argument("proofs_per_tx must be >= 1");
    if (gas.tx_cost(proofs_per_tx) > gas.block_gas_limit) {
        throw std::invalid_argument("proofs_per_tx " + std::to_string(proofs_per_tx) + " exceeds block gas capacity of " +
                                    std::to_string(gas.max_proofs_per_tx()) + " proofs");
    }
}

std::uint64_t DaemonProgress::last_proven_height() const
{
    std::uint64_t h = confirmed_height;
    for (const auto& item : pending_proofs) h += item.public_inputs.header_count;
    return h;
}

Hash256 DaemonProgress::proven_tip_hash() const
{
    return pending_proofs.empty() ? last_checkpoint_hash : pending_proofs.back().public_inputs.new_checkpoint_hash;
}

namespace {
constexpr std::string_view kProgressMagic = "FDP1";
}

Bytes encode_progress(const DaemonProgress& p)
{
    ByteWriter w;
    w.raw(as_bytes(kProgressMagic));
    w.u64(p.confirmed_height);
    w.raw(p.last_checkpoint_hash.span());
    w.u8(p.submission_in_flight ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(p.pending_proofs.size()));
    for (const auto& item : p.pending_proofs) {
        encode_public_inputs(item.public_inputs, w);
        encode_proof(item.proof, w);
    }
    const Hash256 check = double_sha256(w.bytes());
    w.raw(check.span());
    return std::move(w).take();
}

DaemonProgress decode_progress(ByteSpan raw)
{
    if (raw.size() < kProgressMagic.size() + 32) throw DecodeError("progress file truncated");
    const ByteSpan body = raw.first(raw.size() - 32);
    if (double_sha256(body) != Hash256::from_span(raw.last(32))) {
        throw DecodeError("progress file integrity hash mismatch");
    }
    ByteReader r(body);
    auto magic = r.raw(kProgressMagic.size());
    if (!std::equal(magic.begin(), magic.end(), kProgressMagic.begin())) throw DecodeError("not a progress file");
    DaemonProgress p;
    p.confirmed_height = r.u64();
    p.last_checkpoint_hash = Hash256::from_span(r.raw(32));
    p.submission_in_flight = r.u8() != 0;
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        BundleItem item;
        item.public_inputs = decode_public_inputs(r);
        item.proof = decode_proof(r);
        p.pending_proofs.push_back(std::move(item));
    }
    r.expect_done();
    return p;
}

std::optional<DaemonProgress> ProgressStore::load() const
{
    std::ifstream in(path_, std::ios::binary);
    if (!in) return std::nullopt;
    Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_progress(raw);
}

void ProgressStore::save(const DaemonProgress& p) const
{
    const Bytes raw = encode_progress(p);
    std::filesystem::path tmp = path_;
    tmp += ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw FeatherError("cannot write progress file " + tmp.string());
    std::size_t written = 0;
    while (written < raw.size()) {
        ssize_t n = ::write(fd, raw.data() + written, raw.size() - written);
        if (n <= 0) {
            ::close(fd);
            throw FeatherError("short write to " + tmp.string());
        }
        written += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
    std::filesystem::rename(tmp, path_);
}

ProverDaemon::ProverDaemon(DaemonConfig config, ProvingKey proving_key, NodeClient& node, LedgerClient& ledger,
                           GasModel gas)
    : config_(std::move(config)), proving_key_(std::move(proving_key)), node_(node), ledger_(ledger),
      store_(config_.state_path)
{
    config_.validate(gas);
}

template <typename F>
auto ProverDaemon::node_call(F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const TransportError& e) {
        throw DaemonError(DaemonError::Kind::FullNodeUnavailable, std::string("full node unavailable: ") + e.what());
    }
}

template <typename F>
auto ProverDaemon::ledger_call(F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const TransportError& e) {
        throw DaemonError(DaemonError::Kind::LedgerUnavailable, std::string("ledger unavailable: ") + e.what());
    }
}

void ProverDaemon::persist() const { store_.save(*progress_); }

void ProverDaemon::crash(CrashPoint p) const
{
    if (crash_hook_) crash_hook_(p);
}

const DaemonProgress& ProverDaemon::progress()
{
    ensure_loaded();
    return *progress_;
}

void ProverDaemon::ensure_loaded()
{
    if (progress_) return;
    if (auto saved = store_.load()) {
        progress_ = std::move(saved);
        return;
    }
    progress_.emplace();
    anchor_to_ledger();
    persist();
}

void ProverDaemon::anchor_to_ledger()
{
    // Newest best-chain checkpoint that is also on the node's chain.
    CheckpointRecord anchor = ledger_call([&] { return ledger_.latest_checkpoint(); });
    while (true) {
        bool on_chain = false;
        try {
            const auto found = node_call([&] { return node_.header_by_hash(anchor.checkpoint_hash); });
            on_chain = found.height == anchor.height;
        } catch (const NodeError&) {
        }
        if (on_chain || anchor.height == 0) break;
        const auto lower = ledger_call([&] { return ledger_.checkpoint_at_or_below(anchor.height - 1); });
        if (lower.checkpoint_hash == anchor.checkpoint_hash) break;
        anchor = lower;
    }
    progress_->confirmed_height = anchor.height;
    progress_->last_checkpoint_hash = anchor.checkpoint_hash;
    progress_->pending_proofs.clear();
    progress_->submission_in_flight = false;
}

void ProverDaemon::commit_pending()
{
    DaemonProgress& p = *progress_;
    p.confirmed_height = p.last_proven_height();
    p.last_checkpoint_hash = p.proven_tip_hash();
    p.pending_proofs.clear();
    p.submission_in_flight = false;
}

void ProverDaemon::reconcile_in_flight(SyncStats& stats)
{
    DaemonProgress& p = *progress_;
    const std::uint64_t final_height = p.last_proven_height();
    const CheckpointRecord on_ledger = ledger_call([&] { return ledger_.checkpoint_at_or_below(final_height); });
    if (on_ledger.checkpoint_hash == p.proven_tip_hash()) {
        commit_pending();
        persist();
        crash(CrashPoint::AfterCompletionPersisted);
        return;
    }
    submit_pending(stats);
}

void ProverDaemon::submit_pending(SyncStats& stats)
{
    DaemonProgress& p = *progress_;
    if (!p.submission_in_flight) {
        p.submission_in_flight = true;
        persist();
        crash(CrashPoint::AfterIntentPersisted);
    }

    BundleTx tx{p.pending_proofs, config_.sender};
    const Receipt receipt = ledger_call([&] { return ledger_.submit_bundle(tx); });
    ++stats.bundles_submitted;
    crash(CrashPoint::AfterSubmit);

    if (receipt.accepted) {
        ++stats.bundles_accepted;
        commit_pending();
        persist();
        crash(CrashPoint::AfterCompletionPersisted);
        return;
    }
    if (receipt.reject_reason == RejectReason::UnknownPredecessor) {
        anchor_to_ledger();
        ++stats.reanchors;
        persist();
        return;
    }
    p.submission_in_flight = false;
    persist();
    const RejectReason reason = receipt.reject_reason.value_or(RejectReason::ProofInvalid);
    throw DaemonError(DaemonError::Kind::LedgerRejected, std::string("ledger rejected bundle: ") + to_string(reason),
                      reason);
}

SyncStats ProverDaemon::sync_step()
{
    SyncStats stats;
    ensure_loaded();
    DaemonProgress& p = *progress_;
    const std::uint64_t h = config_.headers_per_proof;

    if (p.submission_in_flight) reconcile_in_flight(stats);
    if (p.pending_proofs.size() >= config_.proofs_per_tx) submit_pending(stats);

    const TipInfo tip = node_call([&] { return node_.tip(); });
    while (p.last_proven_height() + h <= tip.height) {
        const std::uint64_t start = p.last_proven_height() + 1;
        std::vector<BlockHeader> headers;
        try {
            headers = node_call([&] { return node_.headers(start, h); });
        } catch (const NodeError&) {
            break; // the node's chain shrank under us; retry next poll
        }

        std::pair<PublicInputs, Witness> statement;
        try {
            statement = build_statement(headers, p.proven_tip_hash());
        } catch (const ChainError&) {
            // The node's chain no longer extends our proven tip.
            anchor_to_ledger();
            ++stats.reanchors;
            persist();
            break;
        }
        Proof proof = prove(proving_key_, statement.first, statement.second);
        p.pending_proofs.push_back({statement.first, std::move(proof)});
        ++stats.proofs_generated;
        persist();
        crash(CrashPoint::AfterProofPersisted);

        if (p.pending_proofs.size() >= config_.proofs_per_tx) submit_pending(stats);
    }

    totals_.proofs_generated += stats.proofs_generated;
    totals_.bundles_submitted += stats.bundles_submitted;
    totals_.bundles_accepted += stats.bundles_accepted;
    totals_.reanchors += stats.reanchors;
    return stats;
}

void ProverDaemon::run(const std::atomic<bool>& stop, const std::function<void(const std::string&)>& log)
{
    auto say = [&](const std::string& msg) {
        if (log) log(msg);
    };
    while (!stop) {
        try {
            const SyncStats s = sync_step();
            if (s.proofs_generated > 0 || s.bundles_submitted > 0) {
                say("proved " + std::to_string(s.proofs_generated) + " batches, submitted " +
                    std::to_string(s.bundles_submitted) + " bundles; proven height " +
                    std::to_string(progress_->last_proven_height()));
            }
        } catch (const DaemonError& e) {
            say(e.what());
        }
        const auto deadline = std::chrono::steady_clock::now() + config_.poll_interval;
        while (!stop && std::chrono::steady_clock::now() < deadline) {
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    }
    if (progress_) persist();
    say("stopped");
}

} // namespace feather
