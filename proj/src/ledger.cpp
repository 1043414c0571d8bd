#include "feather/ledger.hpp"

#include <algorithm>
#include <mutex>

#include "feather/crypto.hpp"

namespace feather {

std::uint64_t GasModel::max_proofs_per_tx() const
{
    if (cost_per_proof == 0 || block_gas_limit < base_cost_per_tx) return 0;
    return (block_gas_limit - base_cost_per_tx) / cost_per_proof;
}

std::uint64_t monthly_upkeep_cost(const GasModel& gas, std::uint64_t headers_per_proof,
                                  std::uint64_t proofs_per_tx, std::uint64_t monthly_headers)
{
    if (headers_per_proof == 0 || proofs_per_tx == 0) {
        throw std::invalid_argument("headers_per_proof and proofs_per_tx must be >= 1");
    }
    const std::uint64_t proofs = (monthly_headers + headers_per_proof - 1) / headers_per_proof;
    const std::uint64_t txs = (proofs + proofs_per_tx - 1) / proofs_per_tx;
    return txs * gas.base_cost_per_tx + proofs * gas.cost_per_proof;
}

void encode_checkpoint_record(const CheckpointRecord& r, ByteWriter& out)
{
    out.raw(r.checkpoint_hash.span());
    out.u64(r.height);
    out.raw(to_le_bytes(r.cumulative_work));
    out.raw(r.parent_checkpoint.span());
}

CheckpointRecord decode_checkpoint_record(ByteReader& in)
{
    CheckpointRecord r;
    r.checkpoint_hash = Hash256::from_span(in.raw(32));
    r.height = in.u64();
    r.cumulative_work = uint256_from_le(in.raw(32));
    r.parent_checkpoint = Hash256::from_span(in.raw(32));
    return r;
}

Bytes encode_bundle(const BundleTx& tx)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(tx.proofs.size()));
    for (const auto& item : tx.proofs) {
        encode_public_inputs(item.public_inputs, w);
        encode_proof(item.proof, w);
    }
    w.u8(static_cast<std::uint8_t>(std::min<std::size_t>(tx.sender.size(), 255)));
    w.raw(as_bytes(std::string_view(tx.sender).substr(0, 255)));
    return std::move(w).take();
}

BundleTx decode_bundle(ByteSpan raw)
{
    ByteReader r(raw);
    BundleTx tx;
    const std::uint32_t count = r.u32();
    // Each item needs at least the public inputs; reject absurd counts early.
    if (count > r.remaining() / PublicInputs::kEncodedSize) throw DecodeError("bundle count exceeds payload");
    tx.proofs.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        BundleItem item;
        item.public_inputs = decode_public_inputs(r);
        item.proof = decode_proof(r);
        tx.proofs.push_back(std::move(item));
    }
    auto sender = r.raw(r.u8());
    tx.sender.assign(sender.begin(), sender.end());
    r.expect_done();
    return tx;
}

const char* to_string(RejectReason r)
{
    switch (r) {
    case RejectReason::EmptyBundle: return "EmptyBundle";
    case RejectReason::GasLimitExceeded: return "GasLimitExceeded";
    case RejectReason::DiscontinuousBundle: return "DiscontinuousBundle";
    case RejectReason::UnknownPredecessor: return "UnknownPredecessor";
    case RejectReason::ProofInvalid: return "ProofInvalid";
    }
    return "?";
}

std::optional<RejectReason> reject_reason_from_string(std::string_view s)
{
    for (auto r : {RejectReason::EmptyBundle, RejectReason::GasLimitExceeded, RejectReason::DiscontinuousBundle,
                   RejectReason::UnknownPredecessor, RejectReason::ProofInvalid}) {
        if (s == to_string(r)) return r;
    }
    return std::nullopt;
}

void encode_receipt(const Receipt& r, ByteWriter& out)
{
    out.raw(r.tx_id.span());
    out.u8(r.accepted ? 1 : 0);
    out.u64(r.gas_used);
    out.raw(r.new_best_tip.span());
    out.u8(r.reject_reason ? static_cast<std::uint8_t>(*r.reject_reason) + 1 : 0);
    out.u64(r.reject_index);
}

CheckpointLedger::CheckpointLedger(const Hash256& genesis_checkpoint, std::uint64_t genesis_height,
                                   VerificationKey verification_key, GasModel gas)
    : gas_(gas), verification_key_(std::move(verification_key)), genesis_(genesis_checkpoint),
      best_tip_(genesis_checkpoint)
{
    records_.emplace(genesis_checkpoint,
                     Entry{CheckpointRecord{genesis_checkpoint, genesis_height, 0, Hash256{}}, next_seq_++});
    best_chain_.push_back(genesis_checkpoint);
}

CheckpointLedger::CheckpointLedger(const CheckpointLedger& other)
{
    std::shared_lock lock(other.mutex_);
    gas_ = other.gas_;
    verification_key_ = other.verification_key_;
    genesis_ = other.genesis_;
    records_ = other.records_;
    best_tip_ = other.best_tip_;
    best_chain_ = other.best_chain_;
    gas_ledger_ = other.gas_ledger_;
    next_seq_ = other.next_seq_;
}

CheckpointLedger deploy(const Hash256& genesis_checkpoint, std::uint64_t genesis_height,
                        VerificationKey verification_key, GasModel gas)
{
    return CheckpointLedger(genesis_checkpoint, genesis_height, std::move(verification_key), gas);
}

Receipt CheckpointLedger::submit_bundle(const BundleTx& tx)
{
    std::unique_lock lock(mutex_);

    Receipt receipt;
    receipt.tx_id = double_sha256(encode_bundle(tx));
    receipt.gas_used = gas_.tx_cost(tx.proofs.size());
    gas_ledger_.push_back({receipt.tx_id, receipt.gas_used});

    auto reject = [&](RejectReason reason, std::uint64_t index = 0) {
        receipt.accepted = false;
        receipt.reject_reason = reason;
        receipt.reject_index = index;
        receipt.new_best_tip = best_tip_;
        return receipt;
    };

    const auto& items = tx.proofs;
    if (items.empty()) return reject(RejectReason::EmptyBundle);
    if (items.size() > gas_.max_proofs_per_tx()) return reject(RejectReason::GasLimitExceeded);
    for (std::size_t i = 1; i < items.size(); ++i) {
        if (items[i].public_inputs.prev_checkpoint_hash != items[i - 1].public_inputs.new_checkpoint_hash) {
            return reject(RejectReason::DiscontinuousBundle, i);
        }
    }
    auto anchor = records_.find(items.front().public_inputs.prev_checkpoint_hash);
    if (anchor == records_.end()) return reject(RejectReason::UnknownPredecessor);

    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!verify(verification_key_, items[i].public_inputs, items[i].proof)) {
            return reject(RejectReason::ProofInvalid, i);
        }
    }

    // All checks passed; derive records before touching state.
    std::vector<CheckpointRecord> fresh;
    CheckpointRecord parent = anchor->second.record;
    for (const auto& item : items) {
        const auto& pub = item.public_inputs;
        CheckpointRecord rec{pub.new_checkpoint_hash, parent.height + pub.header_count,
                             saturating_add(parent.cumulative_work, pub.accumulated_work),
                             parent.checkpoint_hash};
        parent = rec;
        if (!records_.contains(rec.checkpoint_hash)) fresh.push_back(rec);
    }

    const Uint256 best_work = records_.at(best_tip_).record.cumulative_work;
    Hash256 new_best = best_tip_;
    Uint256 new_best_work = best_work;
    for (const auto& rec : fresh) {
        records_.emplace(rec.checkpoint_hash, Entry{rec, next_seq_++});
        if (rec.cumulative_work > new_best_work) {
            new_best = rec.checkpoint_hash;
            new_best_work = rec.cumulative_work;
        }
    }
    if (new_best != best_tip_) {
        best_tip_ = new_best;
        rebuild_best_chain();
    }

    receipt.accepted = true;
    receipt.new_best_tip = best_tip_;
    return receipt;
}

void CheckpointLedger::rebuild_best_chain()
{
    best_chain_.clear();
    Hash256 cursor = best_tip_;
    while (true) {
        best_chain_.push_back(cursor);
        if (cursor == genesis_) break;
        cursor = records_.at(cursor).record.parent_checkpoint;
    }
    std::reverse(best_chain_.begin(), best_chain_.end());
}

CheckpointRecord CheckpointLedger::closest_checkpoint(std::uint64_t height) const
{
    std::shared_lock lock(mutex_);
    auto it = std::upper_bound(best_chain_.begin(), best_chain_.end(), height,
                               [&](std::uint64_t h, const Hash256& hash) { return h < records_.at(hash).record.height; });
    if (it == best_chain_.begin()) return records_.at(genesis_).record;
    return records_.at(*std::prev(it)).record;
}

CheckpointRecord CheckpointLedger::latest_checkpoint() const
{
    std::shared_lock lock(mutex_);
    return records_.at(best_tip_).record;
}

Hash256 CheckpointLedger::fork_choice() const
{
    std::shared_lock lock(mutex_);
    const Entry* best = nullptr;
    for (const auto& [hash, entry] : records_) {
        if (best == nullptr || entry.record.cumulative_work > best->record.cumulative_work ||
            (entry.record.cumulative_work == best->record.cumulative_work && entry.accepted_seq < best->accepted_seq)) {
            best = &entry;
        }
    }
    return best->record.checkpoint_hash;
}

Hash256 CheckpointLedger::best_tip() const
{
    std::shared_lock lock(mutex_);
    return best_tip_;
}

std::optional<CheckpointRecord> CheckpointLedger::find(const Hash256& hash) const
{
    std::shared_lock lock(mutex_);
    auto it = records_.find(hash);
    if (it == records_.end()) return std::nullopt;
    return it->second.record;
}

std::vector<CheckpointRecord> CheckpointLedger::best_chain() const
{
    std::shared_lock lock(mutex_);
    std::vector<CheckpointRecord> out;
    out.reserve(best_chain_.size());
    for (const auto& h : best_chain_) out.push_back(records_.at(h).record);
    return out;
}

std::size_t CheckpointLedger::record_count() const
{
    std::shared_lock lock(mutex_);
    return records_.size();
}

Hash256 CheckpointLedger::state_digest() const
{
    std::shared_lock lock(mutex_);
    std::vector<const Entry*> entries;
    entries.reserve(records_.size());
    for (const auto& [_, e] : records_) entries.push_back(&e);
    std::sort(entries.begin(), entries.end(),
              [](const Entry* a, const Entry* b) { return a->accepted_seq < b->accepted_seq; });
    ByteWriter w;
    for (const Entry* e : entries) {
        encode_checkpoint_record(e->record, w);
        w.u64(e->accepted_seq);
    }
    w.raw(best_tip_.span());
    return double_sha256(w.bytes());
}

std::vector<GasEntry> CheckpointLedger::gas_ledger() const
{
    std::shared_lock lock(mutex_);
    return gas_ledger_;
}

} // namespace feather
