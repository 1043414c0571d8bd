#include "feather/node_service.hpp"

#include <json.hpp>

namespace feather {

using nlohmann::json;

namespace {

WireMessage reply(std::string_view kind, const json& body) { return {std::string(kind), body.dump()}; }

const char* node_error_code(NodeError::Kind k)
{
    return k == NodeError::Kind::NotFound ? "NotFound" : "RangeOutOfBounds";
}

} // namespace

WireMessage NodeService::handle(const WireMessage& request)
{
    try {
        const json body = request.body.empty() ? json::object() : json::parse(request.body);
        const std::string& k = request.kind;
        if (k == kind::kGetTip) {
            const TipInfo tip = node_.tip();
            return reply(k, {{"height", tip.height}, {"hash", tip.hash.to_hex()}});
        }
        if (k == kind::kGetHeaders) {
            const auto headers = node_.headers(body.at("start").get<std::uint64_t>(),
                                               body.at("count").get<std::uint64_t>());
            json list = json::array();
            for (const auto& h : headers) list.push_back(to_hex(encode_header(h)));
            return reply(k, {{"headers", list}});
        }
        if (k == kind::kGetHeaderByHash) {
            const auto found = node_.header_by_hash(Hash256::from_hex(body.at("hash").get<std::string>()));
            return reply(k, {{"header", to_hex(encode_header(found.header))}, {"height", found.height}});
        }
        if (k == kind::kGetMerkleProof) {
            const auto loc = node_.merkle_proof(Hash256::from_hex(body.at("txid").get<std::string>()));
            return reply(k, {{"block_hash", loc.block_hash.to_hex()},
                             {"height", loc.height},
                             {"proof", to_hex(encode_merkle_proof(loc.proof))}});
        }
        if (k == kind::kGetBlock) {
            const Block b = node_.block(Hash256::from_hex(body.at("hash").get<std::string>()));
            ByteWriter w;
            encode_block(b, w);
            return reply(k, {{"block", to_hex(w.bytes())}});
        }
        return make_error("UnknownKind", "unsupported message kind '" + request.kind + "'");
    } catch (const NodeError& e) {
        return make_error(node_error_code(e.kind()), e.what());
    } catch (const json::exception& e) {
        return make_error("BadRequest", e.what());
    } catch (const FeatherError& e) {
        return make_error("BadRequest", e.what());
    }
}

WireMessage NodeClient::call(std::string_view kind, const std::string& body)
{
    WireMessage response = transport_.roundtrip({std::string(kind), body});
    try {
        raise_if_error(response);
    } catch (const WireError& e) {
        if (e.code() == "NotFound") throw NodeError(NodeError::Kind::NotFound, e.what());
        if (e.code() == "RangeOutOfBounds") throw NodeError(NodeError::Kind::RangeOutOfBounds, e.what());
        throw;
    }
    if (response.kind != kind) {
        throw WireError(WireError::Kind::Malformed, "BadReply", "reply kind " + response.kind + " for " + std::string(kind));
    }
    return response;
}

namespace {
template <typename F>
auto parse_reply(const WireMessage& msg, F&& f)
{
    try {
        return f(json::parse(msg.body));
    } catch (const json::exception& e) {
        throw WireError(WireError::Kind::Malformed, "BadReply", std::string("malformed reply: ") + e.what());
    }
}
} // namespace

TipInfo NodeClient::tip()
{
    return parse_reply(call(kind::kGetTip, "{}"), [](const json& j) {
        return TipInfo{j.at("height").get<std::uint64_t>(), Hash256::from_hex(j.at("hash").get<std::string>())};
    });
}

std::vector<BlockHeader> NodeClient::headers(std::uint64_t start_height, std::uint64_t count)
{
    json req{{"start", start_height}, {"count", count}};
    return parse_reply(call(kind::kGetHeaders, req.dump()), [](const json& j) {
        std::vector<BlockHeader> out;
        for (const auto& h : j.at("headers")) out.push_back(decode_header(from_hex(h.get<std::string>())));
        return out;
    });
}

HeaderAtHeight NodeClient::header_by_hash(const Hash256& hash)
{
    json req{{"hash", hash.to_hex()}};
    return parse_reply(call(kind::kGetHeaderByHash, req.dump()), [](const json& j) {
        return HeaderAtHeight{decode_header(from_hex(j.at("header").get<std::string>())),
                              j.at("height").get<std::uint64_t>()};
    });
}

TxLocation NodeClient::merkle_proof(const Hash256& txid)
{
    json req{{"txid", txid.to_hex()}};
    return parse_reply(call(kind::kGetMerkleProof, req.dump()), [](const json& j) {
        return TxLocation{Hash256::from_hex(j.at("block_hash").get<std::string>()), j.at("height").get<std::uint64_t>(),
                          decode_merkle_proof(from_hex(j.at("proof").get<std::string>()))};
    });
}

Block NodeClient::block(const Hash256& hash)
{
    json req{{"hash", hash.to_hex()}};
    return parse_reply(call(kind::kGetBlock, req.dump()),
                       [](const json& j) { return decode_block(from_hex(j.at("block").get<std::string>())); });
}

} // namespace feather
