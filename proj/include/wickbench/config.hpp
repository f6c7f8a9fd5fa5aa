#pragma once

// Experiment configuration read from TOML. Every key is checked against a
// per-experiment schema (name, type, default) before anything runs; unknown
// keys and wrong types are errors.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wickbench/lattice.hpp"
#include "wickbench/sets.hpp"

namespace wb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& experiment_names();

class Config {
public:
    // Parse and validate. `source` names the input in error messages.
    static Config parse(const std::string& text, const std::string& source = "<string>");
    static Config load(const std::string& path);

    const std::string& experiment() const { return experiment_; }
    std::uint64_t seed() const { return seed_; }
    void set_seed(std::uint64_t s);
    std::string out_dir() const { return str("out_dir"); }
    void set_out_dir(const std::string& d);
    // Override one key after loading; validated like a file value.
    void set(const std::string& key, const nlohmann::json& value);

    // Values after defaults are applied. Keys are dotted ("domain.across").
    double num(const std::string& key) const;
    long integer(const std::string& key) const;
    std::string str(const std::string& key) const;
    std::vector<double> nums(const std::string& key) const;
    std::vector<long> ints(const std::string& key) const;
    std::vector<std::string> strs(const std::string& key) const;
    bool flag(const std::string& key) const;
    bool has(const std::string& key) const { return values_.contains(key); }

    // Effective configuration (defaults filled in, out_dir left out), nested as in the file.
    nlohmann::ordered_json echo() const;

    GridDomain domain(const std::string& prefix = "domain") const;
    VMode v_mode() const;

private:
    const nlohmann::json& at(const std::string& key) const;
    void check_ranges() const;

    std::string experiment_;
    std::uint64_t seed_ = 1;
    std::map<std::string, nlohmann::json> values_;
};

}  // namespace wb
