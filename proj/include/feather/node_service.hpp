#pragma once

#include "feather/chain_sim.hpp"
#include "feather/transport.hpp"

namespace feather {

/// Answers GET_TIP, GET_HEADERS, GET_HEADER_BY_HASH, GET_MERKLE_PROOF and
/// GET_BLOCK from a FullNode.
class NodeService final : public MessageHandler {
public:
    explicit NodeService(const FullNode& node) : node_(node) {}
    WireMessage handle(const WireMessage& request) override;

private:
    const FullNode& node_;
};

/// Typed client for a NodeService. Remote NotFound and RangeOutOfBounds
/// errors are rethrown as NodeError.
class NodeClient {
public:
    explicit NodeClient(Transport& transport) : transport_(transport) {}

    TipInfo tip();
    std::vector<BlockHeader> headers(std::uint64_t start_height, std::uint64_t count);
    HeaderAtHeight header_by_hash(const Hash256& hash);
    TxLocation merkle_proof(const Hash256& txid);
    Block block(const Hash256& hash);

private:
    WireMessage call(std::string_view kind, const std::string& body);

    Transport& transport_;
};

} // namespace feather
