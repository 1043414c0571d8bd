#include "feather/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace feather {

ConfigError::ConfigError(Kind kind, std::size_t line, std::string field, const std::string& what)
    : FeatherError((kind == Kind::ParseError ? "ParseError" : "InvariantViolation") +
                   (line > 0 ? " at line " + std::to_string(line) : std::string()) +
                   (field.empty() ? std::string() : " (" + field + ")") + ": " + what),
      kind_(kind), line_(line), field_(std::move(field))
{
}

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct KeyDoc {
    std::string_view key;
    std::string_view default_value;
    std::string_view meaning;
};

constexpr KeyDoc kKeys[] = {
    {"node.endpoint", "(none)", "host:port of the full-node query service"},
    {"ledger.endpoint", "(none)", "host:port of the checkpoint ledger service"},
    {"daemon.headers_per_proof", "64", "headers attested by one proof (h)"},
    {"daemon.proofs_per_tx", "12", "proofs bundled into one ledger transaction (k)"},
    {"daemon.poll_interval_ms", "10000", "milliseconds between daemon polls"},
    {"daemon.state_path", "featherd.progress", "daemon progress file"},
    {"daemon.backend", "mock", "proof backend: recompute or mock"},
    {"daemon.sender", "featherd", "account id attached to submitted bundles"},
    {"setup.seed", "1", "entropy seed for key setup, shared by daemon and ledger"},
    {"sim.seed", "1", "payload seed of the simulated chain"},
    {"sim.compact_target", "0x207fffff", "compact target of every simulated block"},
    {"sim.txs_per_block", "4", "transactions per simulated block"},
    {"sim.chain_length", "16", "blocks mined above genesis"},
    {"gas.base_cost_per_tx", "35800", "fixed gas per ledger transaction"},
    {"gas.cost_per_proof", "225138", "gas per verified proof"},
    {"gas.block_gas_limit", "36000000", "largest admissible transaction gas"},
    {"client.store_path", "featherctl.store", "light-client store file"},
};

bool known_key(std::string_view key)
{
    return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyDoc& d) { return d.key == key; });
}

std::uint64_t parse_u64(const IniDocument& doc, const std::string& key)
{
    std::string_view v = doc.get(key);
    int base = 10;
    if (v.starts_with("0x") || v.starts_with("0X")) {
        v.remove_prefix(2);
        base = 16;
    }
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(ConfigError::Kind::ParseError, doc.line_of(key), key, "expected an unsigned integer");
    }
    return out;
}

std::uint32_t parse_u32(const IniDocument& doc, const std::string& key)
{
    const std::uint64_t v = parse_u64(doc, key);
    if (v > 0xffffffffu) throw ConfigError(ConfigError::Kind::ParseError, doc.line_of(key), key, "value exceeds 32 bits");
    return static_cast<std::uint32_t>(v);
}

} // namespace

IniDocument IniDocument::parse(std::string_view text)
{
    IniDocument doc;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;

        if (auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(ConfigError::Kind::ParseError, line_no, "", "malformed section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(ConfigError::Kind::ParseError, line_no, "", "expected key = value");
        }
        const std::string key = std::string(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError(ConfigError::Kind::ParseError, line_no, "", "empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (doc.values_.contains(full)) {
            throw ConfigError(ConfigError::Kind::ParseError, line_no, full, "duplicate key");
        }
        doc.values_[full] = {std::string(trim(line.substr(eq + 1))), line_no};
    }
    return doc;
}

const std::string& IniDocument::get(const std::string& key) const { return values_.at(key).value; }

std::size_t IniDocument::line_of(const std::string& key) const
{
    auto it = values_.find(key);
    return it == values_.end() ? 0 : it->second.line;
}

std::vector<std::string> IniDocument::keys() const
{
    std::vector<std::string> out;
    for (const auto& [k, _] : values_) out.push_back(k);
    return out;
}

std::string documented_config_keys()
{
    std::ostringstream out;
    for (const auto& d : kKeys) out << d.key << " (default " << d.default_value << "): " << d.meaning << '\n';
    return out.str();
}

FeatherConfig parse_config(std::string_view text)
{
    const IniDocument doc = IniDocument::parse(text);
    if (doc.keys().empty()) throw ConfigError(ConfigError::Kind::ParseError, 0, "", "configuration is empty");
    for (const auto& key : doc.keys()) {
        if (!known_key(key)) throw ConfigError(ConfigError::Kind::ParseError, doc.line_of(key), key, "unknown key");
    }

    FeatherConfig cfg;
    auto str = [&](const char* key, std::string& out) {
        if (doc.has(key)) out = doc.get(key);
    };
    str("node.endpoint", cfg.node_endpoint);
    str("ledger.endpoint", cfg.ledger_endpoint);
    cfg.daemon.full_node_endpoint = cfg.node_endpoint;
    cfg.daemon.ledger_endpoint = cfg.ledger_endpoint;

    if (doc.has("daemon.headers_per_proof")) cfg.daemon.headers_per_proof = parse_u64(doc, "daemon.headers_per_proof");
    if (doc.has("daemon.proofs_per_tx")) cfg.daemon.proofs_per_tx = parse_u64(doc, "daemon.proofs_per_tx");
    if (doc.has("daemon.poll_interval_ms")) {
        cfg.daemon.poll_interval = std::chrono::milliseconds(parse_u64(doc, "daemon.poll_interval_ms"));
    }
    if (doc.has("daemon.state_path")) cfg.daemon.state_path = doc.get("daemon.state_path");
    str("daemon.backend", cfg.daemon.backend);
    str("daemon.sender", cfg.daemon.sender);
    if (doc.has("setup.seed")) cfg.daemon.setup_seed = parse_u64(doc, "setup.seed");

    if (doc.has("sim.seed")) cfg.sim.seed = parse_u64(doc, "sim.seed");
    if (doc.has("sim.compact_target")) cfg.sim.compact_target = parse_u32(doc, "sim.compact_target");
    if (doc.has("sim.txs_per_block")) cfg.sim.txs_per_block = parse_u32(doc, "sim.txs_per_block");
    if (doc.has("sim.chain_length")) cfg.sim.chain_length = parse_u64(doc, "sim.chain_length");

    if (doc.has("gas.base_cost_per_tx")) cfg.gas.base_cost_per_tx = parse_u64(doc, "gas.base_cost_per_tx");
    if (doc.has("gas.cost_per_proof")) cfg.gas.cost_per_proof = parse_u64(doc, "gas.cost_per_proof");
    if (doc.has("gas.block_gas_limit")) cfg.gas.block_gas_limit = parse_u64(doc, "gas.block_gas_limit");
    if (doc.has("client.store_path")) cfg.client_store = doc.get("client.store_path");

    auto invariant = [&](const char* key, auto&& check) {
        try {
            check();
        } catch (const std::exception& e) {
            throw ConfigError(ConfigError::Kind::InvariantViolation, doc.line_of(key), key, e.what());
        }
    };
    invariant("daemon.proofs_per_tx", [&] { cfg.daemon.validate(cfg.gas); });
    invariant("sim.compact_target", [&] { cfg.sim.validate(); });
    invariant("daemon.backend", [&] { (void)proof_backend(cfg.daemon.backend); });
    if (cfg.gas.cost_per_proof == 0) {
        throw ConfigError(ConfigError::Kind::InvariantViolation, doc.line_of("gas.cost_per_proof"), "gas.cost_per_proof",
                          "must be positive");
    }
    return cfg;
}

FeatherConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(ConfigError::Kind::ParseError, 0, "", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace feather
