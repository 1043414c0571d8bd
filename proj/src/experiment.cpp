#include "feather/experiment.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace feather {

SimulatedNetwork::SimulatedNetwork(const SimConfig& sim, std::string_view backend, std::uint64_t headers_per_proof,
                                   std::uint64_t setup_seed, GasModel gas)
    : genesis_(genesis_block(sim.compact_target)), chain_(generate_chain(sim)), node_(genesis_, chain_),
      keys_(setup(backend, headers_per_proof, setup_seed)),
      ledger_(genesis_.hash(), 0, keys_.verification_key, gas), node_service_(node_), ledger_service_(ledger_),
      node_transport_(node_service_), ledger_transport_(ledger_service_), node_client_(node_transport_),
      ledger_client_(ledger_transport_)
{
}

std::filesystem::path scratch_path(const std::string& stem)
{
    static std::atomic<std::uint64_t> counter{0};
    return std::filesystem::temp_directory_path() /
           (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
}

const std::vector<ReferencePoint>& reference_submission_gas()
{
    static const std::vector<ReferencePoint> points{
        {1, 260938},       {16, 3638009},     {32, 7240210},     {48, 10842412},
        {64, 14444613},    {80, 18046815},    {96, 21649017},    {112, 25251218},
        {128, 28853420},   {144, 32455621},   {160, 36057823},   {176, 39660025},
    };
    return points;
}

namespace {

/// Reference monthly-upkeep asymptotes keyed by headers per proof.
const std::map<std::uint64_t, double>& reference_upkeep_asymptote()
{
    static const std::map<std::uint64_t, double> values{{16, 6.12e7}, {32, 3.06e7}, {64, 1.54e7}};
    return values;
}

std::string fmt_number(double v)
{
    char buf[64];
    if (std::isinf(v)) return "inf";
    if (v == std::floor(v) && std::fabs(v) < 1e18) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.9g", v);
    }
    return buf;
}

std::vector<BundleItem> prove_prefix(SimulatedNetwork& net, std::uint64_t h, std::uint64_t proofs)
{
    std::vector<BundleItem> items;
    Hash256 prev = net.genesis().hash();
    for (std::uint64_t i = 0; i < proofs; ++i) {
        const auto headers = net.node().headers(1 + i * h, h);
        auto [pub, witness] = build_statement(headers, prev);
        items.push_back({pub, prove(net.keys().proving_key, pub, witness)});
        prev = pub.new_checkpoint_hash;
    }
    return items;
}

} // namespace

std::vector<SubmissionRow> run_submission_sweep(const std::vector<std::uint64_t>& proof_counts, const GasModel& gas,
                                                std::string_view backend)
{
    constexpr std::uint64_t kHeadersPerProof = 2;
    const std::uint64_t max_k = proof_counts.empty() ? 1 : *std::max_element(proof_counts.begin(), proof_counts.end());
    SimConfig sim;
    sim.seed = 7;
    sim.txs_per_block = 1;
    sim.chain_length = std::max<std::uint64_t>(1, max_k * kHeadersPerProof);
    SimulatedNetwork net(sim, backend, kHeadersPerProof, 1, gas);
    const auto items = prove_prefix(net, kHeadersPerProof, max_k);

    std::vector<SubmissionRow> rows;
    for (std::uint64_t k : proof_counts) {
        CheckpointLedger ledger = deploy(net.genesis().hash(), 0, net.keys().verification_key, gas);
        BundleTx tx{{items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k)}, "sweep"};
        const Receipt r = ledger.submit_bundle(tx);
        rows.push_back({k, r.gas_used, r.accepted, r.reject_reason ? to_string(*r.reject_reason) : ""});
    }
    return rows;
}

std::vector<StorageRow> run_storage_sweep(const std::vector<std::uint64_t>& batch_sizes,
                                          std::uint64_t spv_baseline_height)
{
    std::vector<StorageRow> rows;
    for (std::uint64_t h : batch_sizes) {
        StorageRow row;
        row.headers_per_proof = h;
        row.checkpoints = spv_baseline_height / h + 1;
        ClientStore store;
        store.cached_checkpoints.reserve(row.checkpoints);
        Uint256 work = 0;
        Hash256 parent;
        for (std::uint64_t i = 0; i < row.checkpoints; ++i) {
            CheckpointRecord r{Hash256::from_uint256(Uint256(i + 1)), i * h, work, parent};
            store.cached_checkpoints.push_back(r);
            parent = r.checkpoint_hash;
            work += 2 * h;
        }
        row.report = storage_report(store, spv_baseline_height);
        rows.push_back(std::move(row));
    }
    return rows;
}

EndToEndResult run_end_to_end(const SimConfig& sim, const DaemonConfig& daemon_cfg,
                              const std::vector<std::uint64_t>& query_heights, const GasModel& gas)
{
    SimulatedNetwork net(sim, daemon_cfg.backend, daemon_cfg.headers_per_proof, daemon_cfg.setup_seed, gas);
    DaemonConfig cfg = daemon_cfg;
    if (cfg.state_path.empty() || cfg.state_path == DaemonConfig{}.state_path) cfg.state_path = scratch_path("feather-e2e");
    std::filesystem::remove(cfg.state_path);

    EndToEndResult result;
    {
        ProverDaemon daemon(cfg, net.keys().proving_key, net.node_client(), net.ledger_client(), gas);
        while (true) {
            const SyncStats s = daemon.sync_step();
            if (s.proofs_generated == 0 && s.bundles_submitted == 0) break;
        }
        result.daemon = daemon.totals();
    }
    std::filesystem::remove(cfg.state_path);

    result.chain_tip_height = net.node().tip().height;
    result.ledger_tip_height = net.ledger().latest_checkpoint().height;

    ClientStore store;
    for (std::uint64_t height : query_heights) {
        const Block b = net.node().block_at(height);
        const Hash256 txid = b.transactions[height % b.transactions.size()].txid;
        result.reports.push_back(verify_transaction(txid, store, net.ledger_client(), net.node_client()));
    }
    return result;
}

ForkResult run_fork_scenario(const SimConfig& sim, const DaemonConfig& daemon_cfg, std::uint64_t fork_height,
                             std::uint64_t extra_blocks, std::uint64_t fork_seed, const GasModel& gas)
{
    SimulatedNetwork net(sim, daemon_cfg.backend, daemon_cfg.headers_per_proof, daemon_cfg.setup_seed, gas);

    auto drain = [&](NodeClient& node, const std::filesystem::path& state) {
        DaemonConfig cfg = daemon_cfg;
        cfg.state_path = state;
        std::filesystem::remove(state);
        ProverDaemon daemon(cfg, net.keys().proving_key, node, net.ledger_client(), gas);
        while (true) {
            const SyncStats s = daemon.sync_step();
            if (s.proofs_generated == 0 && s.bundles_submitted == 0) break;
        }
        std::filesystem::remove(state);
    };

    ForkResult result;
    drain(net.node_client(), scratch_path("feather-fork-a"));
    result.original_tip = net.ledger().latest_checkpoint();

    FullNode fork_node(net.genesis(), fork_from(net.chain(), fork_height, extra_blocks, fork_seed));
    NodeService fork_service(fork_node);
    InProcessTransport fork_transport(fork_service);
    NodeClient fork_client(fork_transport);
    drain(fork_client, scratch_path("feather-fork-b"));

    const TipInfo fork_tip = fork_node.tip();
    const std::uint64_t h = daemon_cfg.headers_per_proof;
    const std::uint64_t provable = fork_tip.height - fork_tip.height % h;
    const auto fork_headers = fork_node.headers(provable, 1);
    if (auto rec = net.ledger().find(header_hash(fork_headers.front()))) result.fork_tip = *rec;

    result.best_tip = net.ledger().best_tip();
    result.fork_choice = net.ledger().fork_choice();
    result.fork_won = result.best_tip == result.fork_tip.checkpoint_hash && !result.fork_tip.checkpoint_hash.is_zero();
    return result;
}

namespace {

std::vector<std::uint64_t> parse_list(const IniDocument& doc, const std::string& key)
{
    std::vector<std::uint64_t> out;
    std::stringstream ss(doc.get(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoull(item, &used, 0));
        } catch (const std::exception&) {
            throw ConfigError(ConfigError::Kind::ParseError, doc.line_of(key), key, "expected a comma-separated list");
        }
    }
    return out;
}

std::uint64_t parse_u64(const IniDocument& doc, const std::string& key)
{
    try {
        return std::stoull(doc.get(key), nullptr, 0);
    } catch (const std::exception&) {
        throw ConfigError(ConfigError::Kind::ParseError, doc.line_of(key), key, "expected an unsigned integer");
    }
}

double parse_double(const IniDocument& doc, const std::string& key)
{
    try {
        return std::stod(doc.get(key));
    } catch (const std::exception&) {
        throw ConfigError(ConfigError::Kind::ParseError, doc.line_of(key), key, "expected a number");
    }
}

} // namespace

ExperimentSpec default_experiment(const std::string& scenario)
{
    ExperimentSpec spec;
    spec.scenario = scenario;
    if (scenario == "e2e") {
        spec.sim.chain_length = 4096;
        spec.daemon.headers_per_proof = 64;
        spec.daemon.proofs_per_tx = 4;
        spec.query_heights = {1, 63, 64, 2000, 4096};
    } else if (scenario == "fork") {
        spec.sim.chain_length = 4096;
        spec.sim.txs_per_block = 1;
        spec.daemon.headers_per_proof = 2;
        spec.daemon.proofs_per_tx = 1;
        spec.fork_height = 2048;
        spec.fork_extra = 2;
    }
    return spec;
}

ExperimentSpec parse_experiment(std::string_view text)
{
    const IniDocument doc = IniDocument::parse(text);
    if (!doc.has("experiment.scenario")) {
        throw ConfigError(ConfigError::Kind::ParseError, 0, "experiment.scenario", "missing scenario");
    }
    ExperimentSpec spec;
    spec.scenario = doc.get("experiment.scenario");
    for (const auto& key : doc.keys()) {
        if (key == "experiment.scenario") continue;
        if (key == "experiment.sweep") spec.sweep = parse_list(doc, key);
        else if (key == "experiment.query_heights") spec.query_heights = parse_list(doc, key);
        else if (key == "experiment.spv_height") spec.spv_height = parse_u64(doc, key);
        else if (key == "experiment.fork_height") spec.fork_height = parse_u64(doc, key);
        else if (key == "experiment.fork_extra") spec.fork_extra = parse_u64(doc, key);
        else if (key == "experiment.fork_seed") spec.fork_seed = parse_u64(doc, key);
        else if (key == "sim.seed") spec.sim.seed = parse_u64(doc, key);
        else if (key == "sim.compact_target") spec.sim.compact_target = static_cast<std::uint32_t>(parse_u64(doc, key));
        else if (key == "sim.txs_per_block") spec.sim.txs_per_block = static_cast<std::uint32_t>(parse_u64(doc, key));
        else if (key == "sim.chain_length") spec.sim.chain_length = parse_u64(doc, key);
        else if (key == "daemon.headers_per_proof") spec.daemon.headers_per_proof = parse_u64(doc, key);
        else if (key == "daemon.proofs_per_tx") spec.daemon.proofs_per_tx = parse_u64(doc, key);
        else if (key == "daemon.backend") spec.daemon.backend = doc.get(key);
        else if (key == "setup.seed") spec.daemon.setup_seed = parse_u64(doc, key);
        else if (key == "gas.base_cost_per_tx") spec.gas.base_cost_per_tx = parse_u64(doc, key);
        else if (key == "gas.cost_per_proof") spec.gas.cost_per_proof = parse_u64(doc, key);
        else if (key == "gas.block_gas_limit") spec.gas.block_gas_limit = parse_u64(doc, key);
        else if (key == "expect.tolerance") spec.tolerance = parse_double(doc, key);
        else if (key.starts_with("expect.")) spec.expect[key.substr(7)] = parse_double(doc, key);
        else throw ConfigError(ConfigError::Kind::ParseError, doc.line_of(key), key, "unknown key");
    }
    try {
        spec.sim.validate();
        spec.daemon.validate(spec.gas);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ConfigError::Kind::InvariantViolation, 0, "", e.what());
    }
    return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(ConfigError::Kind::ParseError, 0, "", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_experiment(buf.str());
}

namespace {

void submission_report(const ExperimentSpec& spec, MetricsReport& out, std::ostream& text)
{
    std::vector<std::uint64_t> ks = spec.sweep;
    if (ks.empty()) {
        for (const auto& p : reference_submission_gas()) ks.push_back(p.x);
    }
    text << "# submission cost vs proofs per transaction\n";
    text << "# gas model: " << spec.gas.base_cost_per_tx << " + " << spec.gas.cost_per_proof
         << " * k, block gas limit " << spec.gas.block_gas_limit << " (capacity " << spec.gas.max_proofs_per_tx()
         << " proofs)\n";
    text << "proofs\tgas_used\treference\trel_error\taccepted\n";
    for (const auto& row : run_submission_sweep(ks, spec.gas, spec.daemon.backend)) {
        const std::string id = std::to_string(row.proofs);
        out.metrics["gas_k" + id] = static_cast<double>(row.gas_used);
        out.metrics["accepted_k" + id] = row.accepted ? 1 : 0;
        text << row.proofs << '\t' << row.gas_used << '\t';
        auto ref = std::find_if(reference_submission_gas().begin(), reference_submission_gas().end(),
                                [&](const ReferencePoint& p) { return p.x == row.proofs; });
        if (ref != reference_submission_gas().end()) {
            const double err = (static_cast<double>(row.gas_used) - ref->value) / ref->value;
            out.metrics["rel_error_k" + id] = err;
            text << fmt_number(ref->value) << '\t' << fmt_number(err) << '\t';
        } else {
            text << "-\t-\t";
        }
        text << (row.accepted ? "yes" : "no (" + row.reject_reason + ")") << '\n';
    }
}

void upkeep_report(const ExperimentSpec& spec, MetricsReport& out, std::ostream& text)
{
    std::vector<std::uint64_t> hs = spec.sweep.empty() ? std::vector<std::uint64_t>{16, 32, 64} : spec.sweep;
    constexpr std::uint64_t kMaxK = 68;
    text << "# monthly upkeep (" << kMonthlyHeaders << " headers) vs proofs per transaction\n";
    text << "k";
    for (auto h : hs) text << "\th=" << h;
    text << '\n';
    for (std::uint64_t k = 1; k <= kMaxK; ++k) {
        text << k;
        for (auto h : hs) text << '\t' << monthly_upkeep_cost(spec.gas, h, k);
        text << '\n';
    }
    const double base = static_cast<double>(monthly_upkeep_cost(spec.gas, hs.back(), kMaxK));
    for (auto h : hs) {
        const double asym = static_cast<double>(monthly_upkeep_cost(spec.gas, h, kMaxK));
        const std::string id = std::to_string(h);
        out.metrics["upkeep_h" + id + "_k1"] = static_cast<double>(monthly_upkeep_cost(spec.gas, h, 1));
        out.metrics["upkeep_h" + id + "_k12"] = static_cast<double>(monthly_upkeep_cost(spec.gas, h, 12));
        out.metrics["asymptote_h" + id] = asym;
        out.metrics["ratio_h" + id + "_to_h" + std::to_string(hs.back())] = asym / base;
        text << "asymptote h=" << h << " (k=" << kMaxK << "): " << fmt_number(asym);
        if (auto ref = reference_upkeep_asymptote().find(h); ref != reference_upkeep_asymptote().end()) {
            const double err = (asym - ref->second) / ref->second;
            out.metrics["asymptote_rel_error_h" + id] = err;
            text << " reference " << fmt_number(ref->second) << " rel_error " << fmt_number(err);
        }
        text << " ratio " << fmt_number(asym / base) << '\n';
    }
}

void storage_report_section(const ExperimentSpec& spec, MetricsReport& out, std::ostream& text)
{
    std::vector<std::uint64_t> hs = spec.sweep.empty() ? std::vector<std::uint64_t>{2, 4, 8, 16, 32, 64} : spec.sweep;
    const auto rows = run_storage_sweep(hs, spec.spv_height);
    text << "# checkpoint-only store vs header-only client at height " << spec.spv_height << '\n';
    if (!rows.empty()) text << "# " << rows.front().report.note << '\n';
    text << "h\tcheckpoints\tclient_bytes\tspv_bytes\tratio\n";
    for (const auto& row : rows) {
        const std::string id = std::to_string(row.headers_per_proof);
        out.metrics["client_bytes_h" + id] = static_cast<double>(row.report.client_bytes);
        out.metrics["ratio_h" + id] = row.report.ratio;
        text << row.headers_per_proof << '\t' << row.checkpoints << '\t' << row.report.client_bytes << '\t'
             << row.report.spv_bytes << '\t' << fmt_number(row.report.ratio) << '\n';
    }
}

void e2e_report(const ExperimentSpec& spec, MetricsReport& out, std::ostream& text)
{
    DaemonConfig daemon = spec.daemon;
    daemon.state_path = scratch_path("feather-exp");
    const auto r = run_end_to_end(spec.sim, daemon, spec.query_heights, spec.gas);
    out.metrics["proofs"] = static_cast<double>(r.daemon.proofs_generated);
    out.metrics["bundles"] = static_cast<double>(r.daemon.bundles_accepted);
    out.metrics["chain_tip_height"] = static_cast<double>(r.chain_tip_height);
    out.metrics["ledger_tip_height"] = static_cast<double>(r.ledger_tip_height);
    text << "# end-to-end: chain " << r.chain_tip_height << " blocks, h=" << spec.daemon.headers_per_proof
         << " k=" << spec.daemon.proofs_per_tx << " backend=" << spec.daemon.backend << '\n';
    text << "proofs " << r.daemon.proofs_generated << ", bundles accepted " << r.daemon.bundles_accepted
         << ", ledger tip height " << r.ledger_tip_height << '\n';
    text << "height\tcheckpoint\theaders_downloaded\tverified\n";
    std::uint64_t max_dl = 0;
    bool all = true;
    for (const auto& rep : r.reports) {
        max_dl = std::max(max_dl, rep.headers_downloaded);
        all = all && rep.verified;
        out.metrics["headers_downloaded_" + std::to_string(rep.block_height)] = static_cast<double>(rep.headers_downloaded);
        text << rep.block_height << '\t' << rep.checkpoint_used.height << '\t' << rep.headers_downloaded << '\t'
             << (rep.verified ? "yes" : std::string("no (") + to_string(*rep.failure) + ")") << '\n';
    }
    out.metrics["max_headers_downloaded"] = static_cast<double>(max_dl);
    out.metrics["all_verified"] = all ? 1 : 0;
}

void fork_report(const ExperimentSpec& spec, MetricsReport& out, std::ostream& text)
{
    const auto r = run_fork_scenario(spec.sim, spec.daemon, spec.fork_height, spec.fork_extra, spec.fork_seed, spec.gas);
    out.metrics["original_tip_height"] = static_cast<double>(r.original_tip.height);
    out.metrics["fork_tip_height"] = static_cast<double>(r.fork_tip.height);
    out.metrics["fork_won"] = r.fork_won ? 1 : 0;
    out.metrics["fork_choice_agrees"] = r.fork_choice == r.best_tip ? 1 : 0;
    text << "# fork at " << spec.fork_height << ", +" << spec.fork_extra << " blocks past the original tip\n";
    text << "original tip height " << r.original_tip.height << " work " << to_hex_string(r.original_tip.cumulative_work)
         << '\n';
    text << "fork tip height " << r.fork_tip.height << " work " << to_hex_string(r.fork_tip.cumulative_work) << '\n';
    text << "best tip " << (r.fork_won ? "fork" : "original") << '\n';
}

} // namespace

MetricsReport run_experiment(const ExperimentSpec& spec)
{
    MetricsReport out;
    std::ostringstream text;
    if (spec.scenario == "submission") submission_report(spec, out, text);
    else if (spec.scenario == "upkeep") upkeep_report(spec, out, text);
    else if (spec.scenario == "storage") storage_report_section(spec, out, text);
    else if (spec.scenario == "e2e") e2e_report(spec, out, text);
    else if (spec.scenario == "fork") fork_report(spec, out, text);
    else throw ConfigError(ConfigError::Kind::InvariantViolation, 0, "experiment.scenario", "unknown scenario " + spec.scenario);

    text << "# metrics\n";
    for (const auto& [name, value] : out.metrics) text << name << " = " << fmt_number(value) << '\n';

    if (!spec.expect.empty()) text << "# expectations\n";
    for (const auto& [key, expected] : spec.expect) {
        std::string metric = key;
        enum { Eq, Min, Max } mode = Eq;
        if (key.ends_with(".min")) {
            metric = key.substr(0, key.size() - 4);
            mode = Min;
        } else if (key.ends_with(".max")) {
            metric = key.substr(0, key.size() - 4);
            mode = Max;
        }
        auto it = out.metrics.find(metric);
        bool pass = false;
        if (it != out.metrics.end()) {
            const double v = it->second;
            if (mode == Min) pass = v >= expected;
            else if (mode == Max) pass = v <= expected;
            else pass = expected == 0 ? v == 0 : std::fabs(v - expected) / std::fabs(expected) <= spec.tolerance;
        }
        text << (pass ? "PASS " : "FAIL ") << key << " = " << fmt_number(expected) << " (observed "
             << (it == out.metrics.end() ? std::string("missing") : fmt_number(it->second)) << ")\n";
        if (!pass) out.failed_expectations.push_back(key);
    }
    out.text = text.str();
    return out;
}

} // namespace feather
