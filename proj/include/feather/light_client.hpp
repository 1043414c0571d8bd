#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "feather/ledger.hpp"
#include "feather/ledger_service.hpp"
#include "feather/node_service.hpp"

namespace feather {

/// What the wallet keeps on disk: ledger checkpoints (never evicted) and a
/// bounded cache of headers validated during past verifications.
///
/// Layout: "FCS1", u32 checkpoint count, 104-byte records, u32 header
/// count, then (u64 height, 80-byte header) pairs. An empty store
/// serializes to zero bytes.
struct ClientStore {
    std::vector<CheckpointRecord> cached_checkpoints; // ascending height
    std::map<std::uint64_t, BlockHeader> cached_headers;
    std::filesystem::path store_path;
    std::size_t max_cached_headers = 2016;

    bool empty() const { return cached_checkpoints.empty() && cached_headers.empty(); }
    std::uint64_t serialized_size() const;
    Bytes serialize() const;
    static ClientStore deserialize(ByteSpan raw);

    /// Missing file yields an empty store bound to `path`.
    static ClientStore load(const std::filesystem::path& path);
    void save() const;

    void put_checkpoint(const CheckpointRecord& r);
    /// Inserts headers and evicts the lowest heights beyond the cap.
    void cache_headers(std::uint64_t first_height, const std::vector<BlockHeader>& headers);
    std::optional<CheckpointRecord> lowest_checkpoint_at_or_above(std::uint64_t height) const;
};

inline constexpr std::uint64_t kStoreHeaderBytes = 12;
inline constexpr std::uint64_t kCachedHeaderBytes = 8 + BlockHeader::kSize;

/// Exact store size for the given contents.
constexpr std::uint64_t store_size(std::uint64_t checkpoints, std::uint64_t headers)
{
    if (checkpoints == 0 && headers == 0) return 0;
    return kStoreHeaderBytes + checkpoints * CheckpointRecord::kEncodedSize + headers * kCachedHeaderBytes;
}

struct StorageReport {
    std::uint64_t client_bytes = 0;
    std::uint64_t spv_bytes = 0;
    /// spv_bytes / client_bytes; +infinity for an empty store.
    double ratio = std::numeric_limits<double>::infinity();
    std::string note;
};

/// Compares the store against a header-only client at `spv_baseline_height`.
StorageReport storage_report(const ClientStore& store, std::uint64_t spv_baseline_height);

enum class VerifyFailure { TxNotFound, CheckpointUnavailable, HeaderValidationFailed, InclusionProofInvalid };
const char* to_string(VerifyFailure f);

/// Which checkpoint anchors the header segment.
enum class AnchorPolicy {
    /// Validate forward from the highest checkpoint at or below the tx.
    ForwardFromBelow,
    /// Use a cached best-chain checkpoint above the tx instead when it means
    /// fewer headers, validating the segment back down to the tx block.
    PreferCovering,
};

struct VerificationReport {
    Hash256 txid;
    std::uint64_t block_height = 0;
    CheckpointRecord checkpoint_used;
    std::uint64_t headers_downloaded = 0;
    bool verified = false;
    std::optional<VerifyFailure> failure;
    std::string detail;
    /// Node tip height minus tx height; informational only.
    std::uint64_t confirmations = 0;
};

class ClientError : public FeatherError {
public:
    enum class Kind { LedgerUnavailable, FullNodeUnavailable };
    ClientError(Kind kind, const std::string& what) : FeatherError(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Verification failures are reported, not thrown; unreachable endpoints throw ClientError.
VerificationReport verify_transaction(const Hash256& txid, ClientStore& store, LedgerClient& ledger,
                                      NodeClient& node, AnchorPolicy policy = AnchorPolicy::ForwardFromBelow);

/// Makes the store hold every best-chain checkpoint at or above
/// `from_height`, replacing cached records a ledger reorg displaced.
void sync_checkpoints(ClientStore& store, LedgerClient& ledger, std::uint64_t from_height);

} // namespace feather
