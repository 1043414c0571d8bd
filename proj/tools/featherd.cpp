// Prover daemon: polls a full node, proves header batches and submits
// bundles to the checkpoint ledger.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "feather/config.hpp"
#include "feather/daemon.hpp"
#include "feather/transport.hpp"

namespace {
std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"featherd - header batch prover"};
    std::string config_path;
    std::optional<std::uint64_t> h, k, poll_ms;
    std::optional<std::string> backend;
    bool once = false;
    app.add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    app.add_option("--headers-per-proof", h, "headers per proof (h)");
    app.add_option("--proofs-per-tx", k, "proofs per bundle (k)");
    app.add_option("--poll-interval", poll_ms, "poll interval in milliseconds");
    app.add_option("--backend", backend, "proof backend")->check(CLI::IsMember({"recompute", "mock"}));
    app.add_flag("--once", once, "run a single sync step and exit");
    CLI11_PARSE(app, argc, argv);

    try {
        feather::FeatherConfig cfg = feather::load_config(config_path);
        if (h) cfg.daemon.headers_per_proof = *h;
        if (k) cfg.daemon.proofs_per_tx = *k;
        if (poll_ms) cfg.daemon.poll_interval = std::chrono::milliseconds(*poll_ms);
        if (backend) cfg.daemon.backend = *backend;
        cfg.daemon.validate(cfg.gas);

        feather::TcpTransport node_transport(feather::Endpoint::parse(cfg.node_endpoint));
        feather::TcpTransport ledger_transport(feather::Endpoint::parse(cfg.ledger_endpoint));
        feather::NodeClient node(node_transport);
        feather::LedgerClient ledger(ledger_transport);
        const auto keys = feather::setup(cfg.daemon.backend, cfg.daemon.headers_per_proof, cfg.daemon.setup_seed);
        feather::ProverDaemon daemon(cfg.daemon, keys.proving_key, node, ledger, cfg.gas);

        auto log = [](const std::string& msg) { std::cerr << "featherd: " << msg << std::endl; };
        if (once) {
            const auto s = daemon.sync_step();
            log("proved " + std::to_string(s.proofs_generated) + " batches, accepted " +
                std::to_string(s.bundles_accepted) + " bundles");
            return 0;
        }
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        log("h=" + std::to_string(cfg.daemon.headers_per_proof) + " k=" + std::to_string(cfg.daemon.proofs_per_tx) +
            " backend=" + cfg.daemon.backend);
        daemon.run(g_stop, log);
    } catch (const std::exception& e) {
        std::cerr << "featherd: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
