// Light-client wallet commands.

#include <cmath>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "feather/config.hpp"
#include "feather/light_client.hpp"
#include "feather/transport.hpp"

namespace {

using nlohmann::json;

json record_json(const feather::CheckpointRecord& r)
{
    return {{"hash", r.checkpoint_hash.to_hex()},
            {"height", r.height},
            {"cumulative_work", feather::to_hex_string(r.cumulative_work)},
            {"parent", r.parent_checkpoint.to_hex()}};
}

void print_record(const feather::CheckpointRecord& r, bool as_json)
{
    if (as_json) {
        std::cout << record_json(r).dump() << '\n';
        return;
    }
    std::cout << "checkpoint " << r.checkpoint_hash.to_hex() << "\n  height " << r.height << "\n  work   "
              << feather::to_hex_string(r.cumulative_work) << "\n  parent " << r.parent_checkpoint.to_hex() << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"featherctl - checkpoint light client"};
    app.require_subcommand(1);
    std::string config_path;
    bool as_json = false;
    std::string store_override;
    app.add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    app.add_flag("--json", as_json, "one JSON object per line");

    std::string txid_hex;
    bool prefer_covering = false;
    auto* verify_cmd = app.add_subcommand("verify-tx", "verify a transaction against the ledger");
    verify_cmd->add_option("txid", txid_hex, "transaction id (hex, display order)")->required();
    verify_cmd->add_option("--store", store_override, "client store path");
    verify_cmd->add_flag("--prefer-covering", prefer_covering, "anchor on a cached checkpoint above the block");

    auto* sync_cmd = app.add_subcommand("sync", "fetch best-chain checkpoints into the store");
    sync_cmd->add_option("--store", store_override, "client store path");

    std::uint64_t spv_height = 800'000;
    auto* storage_cmd = app.add_subcommand("storage-report", "compare store size with a header-only client");
    storage_cmd->add_option("--spv-height", spv_height, "baseline chain height");
    storage_cmd->add_option("--store", store_override, "client store path");

    std::vector<std::string> cp_args;
    auto* cp_cmd = app.add_subcommand("checkpoint", "query the ledger: latest | at <height>");
    cp_cmd->add_option("what", cp_args)->required()->expected(1, 2);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = feather::load_config(config_path);
        const std::filesystem::path store_path = store_override.empty() ? cfg.client_store : std::filesystem::path(store_override);
        feather::TcpTransport ledger_transport(feather::Endpoint::parse(cfg.ledger_endpoint));
        feather::LedgerClient ledger(ledger_transport);

        if (*cp_cmd) {
            if (cp_args[0] == "latest" && cp_args.size() == 1) {
                print_record(ledger.latest_checkpoint(), as_json);
            } else if (cp_args[0] == "at" && cp_args.size() == 2) {
                print_record(ledger.checkpoint_at_or_below(std::stoull(cp_args[1])), as_json);
            } else {
                std::cerr << "featherctl: expected 'checkpoint latest' or 'checkpoint at <height>'" << std::endl;
                return 2;
            }
            return 0;
        }

        auto store = feather::ClientStore::load(store_path);

        if (*storage_cmd) {
            const auto r = feather::storage_report(store, spv_height);
            if (as_json) {
                json j{{"client_bytes", r.client_bytes}, {"spv_bytes", r.spv_bytes}, {"note", r.note}};
                j["ratio"] = std::isinf(r.ratio) ? json("inf") : json(r.ratio);
                std::cout << j.dump() << '\n';
            } else {
                std::cout << "client store   " << r.client_bytes << " B (" << store.cached_checkpoints.size()
                          << " checkpoints, " << store.cached_headers.size() << " headers)\n"
                          << "header client  " << r.spv_bytes << " B at height " << spv_height << '\n'
                          << "ratio          " << r.ratio << '\n'
                          << r.note << '\n';
            }
            return 0;
        }

        if (*sync_cmd) {
            const std::uint64_t before = store.cached_checkpoints.size();
            feather::sync_checkpoints(store, ledger, 0);
            store.save();
            const auto& tip = store.cached_checkpoints.back();
            if (as_json) {
                std::cout << json{{"checkpoints", store.cached_checkpoints.size()},
                                  {"previously_cached", before},
                                  {"tip", record_json(tip)}}
                                 .dump()
                          << '\n';
            } else {
                std::cout << "synced " << store.cached_checkpoints.size() << " checkpoints (had " << before
                          << "), tip height " << tip.height << '\n';
            }
            return 0;
        }

        feather::TcpTransport node_transport(feather::Endpoint::parse(cfg.node_endpoint));
        feather::NodeClient node(node_transport);
        const auto txid = feather::Hash256::from_hex(txid_hex);
        const auto policy =
            prefer_covering ? feather::AnchorPolicy::PreferCovering : feather::AnchorPolicy::ForwardFromBelow;
        const auto rep = feather::verify_transaction(txid, store, ledger, node, policy);
        store.save();
        if (as_json) {
            json j{{"txid", rep.txid.to_hex()},
                   {"verified", rep.verified},
                   {"block_height", rep.block_height},
                   {"checkpoint", record_json(rep.checkpoint_used)},
                   {"headers_downloaded", rep.headers_downloaded},
                   {"confirmations", rep.confirmations}};
            if (rep.failure) j["failure"] = feather::to_string(*rep.failure);
            if (!rep.detail.empty()) j["detail"] = rep.detail;
            std::cout << j.dump() << '\n';
        } else {
            std::cout << (rep.verified ? "VERIFIED " : "NOT VERIFIED ") << rep.txid.to_hex() << '\n'
                      << "  block height        " << rep.block_height << '\n'
                      << "  anchor checkpoint   " << rep.checkpoint_used.height << " "
                      << rep.checkpoint_used.checkpoint_hash.to_hex() << '\n'
                      << "  headers downloaded  " << rep.headers_downloaded << '\n'
                      << "  confirmations       " << rep.confirmations << '\n';
            if (rep.failure) std::cout << "  failure             " << feather::to_string(*rep.failure) << '\n';
            if (!rep.detail.empty()) std::cout << "  detail              " << rep.detail << '\n';
        }
        return rep.verified ? 0 : 3;
    } catch (const std::exception& e) {
        std::cerr << "featherctl: " << e.what() << std::endl;
        return 1;
    }
}
