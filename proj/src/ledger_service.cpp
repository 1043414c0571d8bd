#include "feather/ledger_service.hpp"

#include <json.hpp>

namespace feather {

using nlohmann::json;

namespace {

json record_to_json(const CheckpointRecord& r)
{
    return {{"hash", r.checkpoint_hash.to_hex()},
            {"height", r.height},
            {"cumulative_work", to_hex_string(r.cumulative_work)},
            {"parent", r.parent_checkpoint.to_hex()}};
}

CheckpointRecord record_from_json(const json& j)
{
    return {Hash256::from_hex(j.at("hash").get<std::string>()), j.at("height").get<std::uint64_t>(),
            parse_uint256(j.at("cumulative_work").get<std::string>()),
            Hash256::from_hex(j.at("parent").get<std::string>())};
}

json receipt_to_json(const Receipt& r)
{
    json j{{"tx_id", r.tx_id.to_hex()},
           {"accepted", r.accepted},
           {"gas_used", r.gas_used},
           {"new_best_tip", r.new_best_tip.to_hex()}};
    if (r.reject_reason) {
        j["reject_reason"] = to_string(*r.reject_reason);
        j["reject_index"] = r.reject_index;
    }
    return j;
}

Receipt receipt_from_json(const json& j)
{
    Receipt r;
    r.tx_id = Hash256::from_hex(j.at("tx_id").get<std::string>());
    r.accepted = j.at("accepted").get<bool>();
    r.gas_used = j.at("gas_used").get<std::uint64_t>();
    r.new_best_tip = Hash256::from_hex(j.at("new_best_tip").get<std::string>());
    if (j.contains("reject_reason")) {
        r.reject_reason = reject_reason_from_string(j.at("reject_reason").get<std::string>());
        if (!r.reject_reason) throw DecodeError("unknown reject reason");
        r.reject_index = j.value("reject_index", std::uint64_t{0});
    }
    return r;
}

} // namespace

WireMessage LedgerService::handle(const WireMessage& request)
{
    try {
        const json body = request.body.empty() ? json::object() : json::parse(request.body);
        const std::string& k = request.kind;
        if (k == kind::kSubmitBundle) {
            const BundleTx tx = decode_bundle(from_hex(body.at("bundle").get<std::string>()));
            return {k, receipt_to_json(ledger_.submit_bundle(tx)).dump()};
        }
        if (k == kind::kGetLatestCheckpoint) return {k, record_to_json(ledger_.latest_checkpoint()).dump()};
        if (k == kind::kGetCheckpointAtOrBelow) {
            return {k, record_to_json(ledger_.closest_checkpoint(body.at("height").get<std::uint64_t>())).dump()};
        }
        return make_error("UnknownKind", "unsupported message kind '" + request.kind + "'");
    } catch (const json::exception& e) {
        return make_error("BadRequest", e.what());
    } catch (const FeatherError& e) {
        return make_error("BadRequest", e.what());
    }
}

WireMessage LedgerClient::call(std::string_view kind, const std::string& body)
{
    WireMessage response = transport_.roundtrip({std::string(kind), body});
    raise_if_error(response);
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

Receipt LedgerClient::submit_bundle(const BundleTx& tx)
{
    json req{{"bundle", to_hex(encode_bundle(tx))}};
    return parse_reply(call(kind::kSubmitBundle, req.dump()), receipt_from_json);
}

CheckpointRecord LedgerClient::latest_checkpoint()
{
    return parse_reply(call(kind::kGetLatestCheckpoint, "{}"), record_from_json);
}

CheckpointRecord LedgerClient::checkpoint_at_or_below(std::uint64_t height)
{
    json req{{"height", height}};
    return parse_reply(call(kind::kGetCheckpointAtOrBelow, req.dump()), record_from_json);
}

} // namespace feather
