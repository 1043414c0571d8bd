#pragma once

#include "feather/ledger.hpp"
#include "feather/transport.hpp"

namespace feather {

/// Answers SUBMIT_BUNDLE, GET_LATEST_CHECKPOINT and
/// GET_CHECKPOINT_AT_OR_BELOW from a CheckpointLedger.
class LedgerService final : public MessageHandler {
public:
    explicit LedgerService(CheckpointLedger& ledger) : ledger_(ledger) {}
    WireMessage handle(const WireMessage& request) override;

private:
    CheckpointLedger& ledger_;
};

class LedgerClient {
public:
    explicit LedgerClient(Transport& transport) : transport_(transport) {}

    Receipt submit_bundle(const BundleTx& tx);
    CheckpointRecord latest_checkpoint();
    CheckpointRecord checkpoint_at_or_below(std::uint64_t height);

private:
    WireMessage call(std::string_view kind, const std::string& body);

    Transport& transport_;
};

} // namespace feather
