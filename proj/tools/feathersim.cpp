// Simulated full node, ledger host and experiment runner.

#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "feather/config.hpp"
#include "feather/experiment.hpp"
#include "feather/transport.hpp"

namespace {

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

void serve(feather::MessageHandler& handler, const std::string& endpoint, const std::string& what)
{
    const auto ep = feather::Endpoint::parse(endpoint);
    feather::TcpServer server(handler, ep.host, ep.port);
    std::cerr << "feathersim: " << what << " listening on " << ep.host << ":" << server.port() << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"feathersim - simulated network and experiments"};
    app.require_subcommand(1);

    std::string config_path;
    auto* node_cmd = app.add_subcommand("node", "serve a simulated full node");
    node_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    auto* ledger_cmd = app.add_subcommand("ledger", "serve a freshly deployed checkpoint ledger");
    ledger_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);

    std::string experiment_file, scenario;
    auto* exp_cmd = app.add_subcommand("experiment", "run an experiment and print its report");
    exp_cmd->add_option("file", experiment_file, "experiment file");
    exp_cmd->add_option("--scenario", scenario, "run a scenario with default parameters")
        ->check(CLI::IsMember({"submission", "upkeep", "storage", "e2e", "fork"}));

    auto* keys_cmd = app.add_subcommand("config-keys", "list every config key");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*keys_cmd) {
            std::cout << feather::documented_config_keys();
            return 0;
        }
        if (*exp_cmd) {
            if (experiment_file.empty() == scenario.empty()) {
                std::cerr << "feathersim: give either an experiment file or --scenario" << std::endl;
                return 2;
            }
            const auto spec = experiment_file.empty() ? feather::default_experiment(scenario)
                                                      : feather::load_experiment(experiment_file);
            const auto report = feather::run_experiment(spec);
            std::cout << report.text;
            return report.ok() ? 0 : 1;
        }

        const auto cfg = feather::load_config(config_path);
        const auto genesis = feather::genesis_block(cfg.sim.compact_target);
        if (*node_cmd) {
            std::cerr << "feathersim: mining " << cfg.sim.chain_length << " blocks" << std::endl;
            feather::FullNode node(genesis, feather::generate_chain(cfg.sim));
            feather::NodeService service(node);
            serve(service, cfg.node_endpoint, "full node");
        } else {
            const auto keys = feather::setup(cfg.daemon.backend, cfg.daemon.headers_per_proof, cfg.daemon.setup_seed);
            auto ledger = feather::deploy(genesis.hash(), 0, keys.verification_key, cfg.gas);
            feather::LedgerService service(ledger);
            serve(service, cfg.ledger_endpoint, "ledger");
        }
    } catch (const std::exception& e) {
        std::cerr << "feathersim: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
