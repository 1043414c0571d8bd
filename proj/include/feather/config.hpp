#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "feather/chain_sim.hpp"
#include "feather/daemon.hpp"
#include "feather/ledger.hpp"

namespace feather {

class ConfigError : public FeatherError {
public:
    enum class Kind { ParseError, InvariantViolation };
    ConfigError(Kind kind, std::size_t line, std::string field, const std::string& what);
    Kind kind() const { return kind_; }
    /// 1-based line, 0 when the error is not tied to a line.
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    Kind kind_;
    std::size_t line_;
    std::string field_;
};

/// Flat "key = value" text grouped under [section] headers. '#' and ';'
/// start comments. Keys are addressed as "section.key".
class IniDocument {
public:
    static IniDocument parse(std::string_view text);

    bool has(const std::string& key) const { return values_.contains(key); }
    const std::string& get(const std::string& key) const;
    std::size_t line_of(const std::string& key) const;
    std::vector<std::string> keys() const;

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };
    std::map<std::string, Entry> values_;
};

/// Everything the services and tools read from a config file.
struct FeatherConfig {
    SimConfig sim;
    DaemonConfig daemon;
    GasModel gas;
    std::string node_endpoint;
    std::string ledger_endpoint;
    std::filesystem::path client_store = "featherctl.store";
};

/// Every recognised key with its default and meaning, one per line.
std::string documented_config_keys();

/// Throws ConfigError(ParseError) for syntax errors, unknown keys, bad
/// values or an empty document, and ConfigError(InvariantViolation) when a
/// value breaks a component invariant.
FeatherConfig parse_config(std::string_view text);
FeatherConfig load_config(const std::filesystem::path& path);

} // namespace feather
