#include "wickbench/config.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

namespace wb {

using nlohmann::json;

namespace {

enum class Kind { integer, number, string, boolean, numbers, integers, strings };

struct Entry {
    std::string key;
    Kind kind;
    json def;   // null: no default (required)
};

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::integer: return "integer";
        case Kind::number: return "number";
        case Kind::string: return "string";
        case Kind::boolean: return "boolean";
        case Kind::numbers: return "array of numbers";
        case Kind::integers: return "array of integers";
        case Kind::strings: return "array of strings";
    }
    return "?";
}

std::vector<Entry> domain_keys(int across) {
    return {{"domain.shape", Kind::string, "disk"},
            {"domain.across", Kind::integer, across},
            {"domain.h", Kind::number, 0.0},
            {"domain.scale", Kind::number, 1.0}};
}

std::vector<Entry> fps_keys(int across, double delta) {
    auto e = domain_keys(across);
    e.push_back({"v", Kind::number, 1.0});
    e.push_back({"a", Kind::number, 0.0});
    e.push_back({"delta", Kind::number, delta});
    e.push_back({"v_mode", Kind::string, "metric"});
    return e;
}

std::vector<Entry> schema(const std::string& exp) {
    std::vector<Entry> e = {{"experiment", Kind::string, nullptr},
                            {"seed", Kind::integer, 1},
                            {"out_dir", Kind::string, "results/" + exp}};
    auto add = [&](std::vector<Entry> more) { e.insert(e.end(), more.begin(), more.end()); };
    if (exp == "identities") {
        add({{"n_max", Kind::integer, 12},
             {"two_var_n", Kind::integer, 10},
             {"reexp_degree", Kind::integer, 8},
             {"combi_n", Kind::integer, 11},
             {"group_cap", Kind::integer, 10},
             {"subgroup_cap", Kind::integer, 12},
             {"nullspace_n", Kind::integers, json::array({4, 6, 8})},
             {"series_v", Kind::numbers, json::array({0.5, 1.0, 2.0})},
             {"series_t", Kind::numbers, json::array({0.5, 1.0, 2.0, 5.0})},
             {"series_terms", Kind::integer, 30},
             {"criteria.series_tol", Kind::number, 1e-12},
             {"criteria.bessel_tol", Kind::number, 1e-9},
             {"criteria.potential_zero_tol", Kind::number, 1e-10},
             {"criteria.slope_tol", Kind::number, 0.05}});
    } else if (exp == "gff-cov") {
        add(domain_keys(33));
        add({{"samples", Kind::integer, 200000},
             {"pairs", Kind::integer, 20},
             {"orders", Kind::integers, json::array({1, 2, 3})},
             {"criteria.z_bound", Kind::number, 4.0},
             {"criteria.min_pass", Kind::integer, 19}});
    } else if (exp == "fps-law") {
        add(fps_keys(129, 0.025));
        add({{"parts", Kind::strings, json::array({"mean", "ks"})},
             {"mean_across", Kind::integer, 65},
             {"mean_samples", Kind::integer, 2000},
             {"compare_across", Kind::integer, 65},
             {"ks_samples", Kind::integer, 1000},
             {"trend_seeds", Kind::integer, 3},
             {"vertex_diagnostic", Kind::boolean, true},
             {"criteria.mean_se", Kind::number, 3.0},
             {"criteria.ks_bound", Kind::number, 0.08},
             {"criteria.trend_min", Kind::integer, 2}});
    } else if (exp == "expansion") {
        add(fps_keys(65, 0.025));
        add({{"parts", Kind::strings, json::array({"expectation", "minkowski", "doubling", "second_moment", "residual"})},
             {"s_grid", Kind::numbers, json::array({4, 6, 8, 12, 16})},
             {"samples", Kind::integer, 4000},
             {"n_trunc", Kind::integer, 2},
             {"minkowski_samples", Kind::integer, 500},
             {"second_moment_s", Kind::numbers, json::array({4, 6, 8, 12, 16})},
             {"second_moment_samples", Kind::integer, 500},
             {"bump_radius", Kind::number, 0.3},
             {"bump_offset", Kind::number, 0.45},
             {"residual_s", Kind::numbers, json::array({4, 6, 8, 12, 16})},
             {"eta", Kind::number, 1.5},
             {"psi3_base", Kind::number, 32.0},
             {"residual_samples", Kind::integer, 200},
             {"criteria.expect_abs", Kind::number, 0.02},
             {"criteria.expect_se", Kind::number, 3.0},
             {"criteria.ratio_lo", Kind::number, 0.9},
             {"criteria.ratio_hi", Kind::number, 1.1},
             {"criteria.ratio_count", Kind::integer, 3},
             {"criteria.mass_rel", Kind::number, 0.1},
             {"criteria.doubling_rel", Kind::number, 0.15},
             {"criteria.second_moment_slope", Kind::number, -1.0},
             {"criteria.second_moment_tol", Kind::number, 0.2},
             {"criteria.residual_slope", Kind::number, -0.35}});
    } else if (exp == "multiscale") {
        add(fps_keys(65, 0.025));
        add({{"base_s", Kind::number, 5.0},
             {"alphas_a", Kind::numbers, json::array({1, 2})},
             {"alphas_b", Kind::numbers, json::array({1, 3})},
             {"n", Kind::integer, 1},
             {"samples", Kind::integer, 2000},
             {"criteria.combined_se", Kind::number, 5.0},
             {"criteria.mass_se", Kind::number, 4.0}});
    } else if (exp == "gmc") {
        add(fps_keys(65, 0.025));
        add({{"gammas", Kind::numbers, json::array({0.4, 0.2, 0.1})},
             {"n", Kind::integer, 1},
             {"psi_base_s", Kind::number, 16.0},
             {"alphas", Kind::numbers, json::array({1})},
             {"samples", Kind::integer, 200},
             {"seed_count", Kind::integer, 10},
             {"even_gamma", Kind::number, 0.1},
             {"even_samples", Kind::integer, 200},
             {"criteria.min_fraction", Kind::number, 0.8},
             {"criteria.even_tol", Kind::number, 0.1}});
    } else if (exp == "sausage") {
        add({{"M", Kind::number, 1.0},
             {"eps_grid", Kind::numbers, json::array({1e-3, 1e-2})},
             {"paths", Kind::integer, 500},
             {"two_point_M", Kind::number, 4.0},
             {"two_point_pairs", Kind::integer, 10},
             {"two_point_cell", Kind::number, 0.05},
             {"two_point_paths", Kind::integer, 10000},
             {"two_point_dt", Kind::number, 2.5e-6},
             {"mass_change_inputs", Kind::integer, 100},
             {"mass_change_n", Kind::integer, 4},
             {"criteria.ratio_lo", Kind::number, 0.85},
             {"criteria.ratio_hi", Kind::number, 1.15},
             {"criteria.z_bound", Kind::number, 4.0},
             {"criteria.min_pairs", Kind::integer, 9},
             {"criteria.mass_change_tol", Kind::number, 1e-12}});
    } else if (exp == "collar") {
        add(fps_keys(65, 0.025));
        add({{"k", Kind::integers, json::array({0, 1, 2})},
             {"q_grid", Kind::numbers, json::array({2, 3, 4, 6, 8})},
             {"q_ext", Kind::numbers, json::array({16, 24, 32, 48, 64})},
             {"samples", Kind::integer, 500},
             {"criteria.slope_tol", Kind::number, 0.2}});
    }
    return e;
}

bool kind_ok(Kind k, const json& v) {
    auto all = [&](auto pred) {
        if (!v.is_array()) return false;
        for (auto& x : v)
            if (!pred(x)) return false;
        return true;
    };
    switch (k) {
        case Kind::integer: return v.is_number_integer();
        case Kind::number: return v.is_number();
        case Kind::string: return v.is_string();
        case Kind::boolean: return v.is_boolean();
        case Kind::numbers: return all([](const json& x) { return x.is_number(); });
        case Kind::integers: return all([](const json& x) { return x.is_number_integer(); });
        case Kind::strings: return all([](const json& x) { return x.is_string(); });
    }
    return false;
}

json to_json(const toml::node& n, const std::string& key) {
    if (auto i = n.as_integer()) return i->get();
    if (auto f = n.as_floating_point()) return f->get();
    if (auto s = n.as_string()) return s->get();
    if (auto b = n.as_boolean()) return b->get();
    if (auto a = n.as_array()) {
        json out = json::array();
        for (auto& x : *a) out.push_back(to_json(x, key));
        return out;
    }
    throw ConfigError("unsupported value type for key '" + key + "'");
}

void flatten(const toml::table& t, const std::string& prefix, std::map<std::string, json>& out) {
    for (auto& [k, node] : t) {
        std::string key = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
        if (auto sub = node.as_table())
            flatten(*sub, key, out);
        else
            out[key] = to_json(node, key);
    }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"identities", "gff-cov", "fps-law", "expansion",
                                                   "multiscale", "gmc",     "sausage", "collar"};
    return names;
}

Config Config::parse(const std::string& text, const std::string& source) {
    toml::table tbl;
    try {
        tbl = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ": " << e.description() << " at line " << e.source().begin.line;
        throw ConfigError(os.str());
    }
    std::map<std::string, json> given;
    flatten(tbl, "", given);
    auto it = given.find("experiment");
    if (it == given.end() || !it->second.is_string()) throw ConfigError(source + ": missing string key 'experiment'");
    Config c;
    c.experiment_ = it->second.get<std::string>();
    bool known = false;
    for (auto& n : experiment_names()) known = known || n == c.experiment_;
    if (!known) throw ConfigError(source + ": unknown experiment '" + c.experiment_ + "'");

    auto sch = schema(c.experiment_);
    std::map<std::string, const Entry*> by_key;
    for (auto& e : sch) by_key[e.key] = &e;
    for (auto& [k, v] : given) {
        auto f = by_key.find(k);
        if (f == by_key.end()) throw ConfigError(source + ": unknown key '" + k + "' for experiment " + c.experiment_);
        if (!kind_ok(f->second->kind, v))
            throw ConfigError(source + ": key '" + k + "' must be " + kind_name(f->second->kind));
    }
    for (auto& e : sch) {
        auto g = given.find(e.key);
        if (g != given.end())
            c.values_[e.key] = g->second;
        else if (!e.def.is_null())
            c.values_[e.key] = e.def;
        else
            throw ConfigError(source + ": missing required key '" + e.key + "'");
    }
    long s = c.values_.at("seed").get<long>();
    if (s < 0) throw ConfigError(source + ": seed must be nonnegative");
    c.seed_ = static_cast<std::uint64_t>(s);
    c.check_ranges();
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void Config::set_seed(std::uint64_t s) {
    seed_ = s;
    values_["seed"] = s;
}

void Config::set_out_dir(const std::string& d) { values_["out_dir"] = d; }

void Config::set(const std::string& key, const nlohmann::json& value) {
    for (auto& e : schema(experiment_)) {
        if (e.key != key) continue;
        if (key == "experiment" || key == "seed") throw ConfigError("'" + key + "' cannot be overridden with set()");
        if (!kind_ok(e.kind, value)) throw ConfigError("key '" + key + "' must be " + kind_name(e.kind));
        auto old = values_[key];
        values_[key] = value;
        try {
            check_ranges();
        } catch (...) {
            values_[key] = old;
            throw;
        }
        return;
    }
    throw ConfigError("unknown key '" + key + "' for experiment " + experiment_);
}

const json& Config::at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config key '" + key + "' is not defined for " + experiment_);
    return it->second;
}

double Config::num(const std::string& key) const { return at(key).get<double>(); }
long Config::integer(const std::string& key) const { return at(key).get<long>(); }
std::string Config::str(const std::string& key) const { return at(key).get<std::string>(); }
std::vector<double> Config::nums(const std::string& key) const { return at(key).get<std::vector<double>>(); }
std::vector<long> Config::ints(const std::string& key) const { return at(key).get<std::vector<long>>(); }
std::vector<std::string> Config::strs(const std::string& key) const {
    return at(key).get<std::vector<std::string>>();
}

nlohmann::ordered_json Config::echo() const {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (auto& e : schema(experiment_)) {
        auto it = values_.find(e.key);
        // where results go is not part of what was computed
        if (it == values_.end() || e.key == "out_dir") continue;
        nlohmann::ordered_json* node = &out;
        std::string rest = e.key;
        for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
            node = &(*node)[rest.substr(0, dot)];
            rest = rest.substr(dot + 1);
        }
        (*node)[rest] = nlohmann::ordered_json(it->second);
    }
    return out;
}

GridDomain Config::domain(const std::string& prefix) const {
    std::string shape = str(prefix + ".shape");
    double scale = num(prefix + ".scale"), h = num(prefix + ".h");
    long across = integer(prefix + ".across");
    if (h <= 0) h = scale / (across - 1) * (shape == "disk" ? 2.0 : 1.0);
    try {
        return shape == "disk" ? GridDomain::disk(scale, h) : GridDomain::square(scale, h);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("domain: ") + e.what());
    }
}

bool Config::flag(const std::string& key) const { return at(key).get<bool>(); }

VMode Config::v_mode() const { return str("v_mode") == "vertex" ? VMode::vertex : VMode::metric; }

void Config::check_ranges() const {
    auto fail = [&](const std::string& msg) { throw ConfigError(experiment_ + ": " + msg); };
    auto positive = [&](const std::string& k) {
        if (has(k) && !(num(k) > 0)) fail("'" + k + "' must be positive");
    };
    auto positive_int = [&](const std::string& k) {
        if (has(k) && integer(k) < 1) fail("'" + k + "' must be at least 1");
    };
    auto nonempty = [&](const std::string& k) {
        if (has(k) && at(k).empty()) fail("'" + k + "' must not be empty");
    };
    auto one_of = [&](const std::string& k, std::vector<std::string> opts) {
        if (!has(k)) return;
        auto check = [&](const std::string& v) {
            for (auto& o : opts)
                if (o == v) return;
            fail("'" + k + "' has invalid value '" + v + "'");
        };
        if (at(k).is_string())
            check(str(k));
        else
            for (auto& v : strs(k)) check(v);
    };

    one_of("domain.shape", {"disk", "square"});
    one_of("v_mode", {"vertex", "metric"});
    if (has("domain.across") && integer("domain.across") < 5) fail("'domain.across' must be at least 5");
    if (has("domain.h") && num("domain.h") < 0) fail("'domain.h' must be nonnegative");
    positive("domain.scale");
    if (has("domain.shape")) {
        if (str("domain.shape") == "square" && experiment_ != "gff-cov")
            fail("FPS experiments need a disk (conformal radius in closed form)");
        (void)domain();  // mesh validity
    }
    for (const char* k : {"mean_across", "compare_across"})
        if (has(k) && integer(k) < 5) fail(std::string("'") + k + "' must be at least 5");
    if (has("delta") && !(num("delta") > 0 && num("delta") <= 1)) fail("'delta' must lie in (0, 1]");
    if (has("v") && has("a") && !(num("a") < num("v"))) fail("level 'a' must be below boundary value 'v'");
    for (const char* k : {"samples", "pairs", "mean_samples", "ks_samples", "trend_seeds", "minkowski_samples",
                          "second_moment_samples", "residual_samples", "seed_count", "even_samples", "paths",
                          "two_point_pairs", "two_point_paths", "mass_change_inputs", "series_terms"})
        positive_int(k);
    for (const char* k : {"eta", "bump_radius", "psi3_base", "base_s", "psi_base_s", "even_gamma", "M", "two_point_M",
                          "two_point_cell", "two_point_dt"})
        positive(k);
    for (const char* k : {"s_grid", "second_moment_s", "residual_s", "alphas", "alphas_a", "alphas_b", "gammas",
                          "eps_grid", "q_grid", "q_ext", "orders", "k", "nullspace_n", "series_v", "series_t"})
        nonempty(k);
    for (const char* k : {"s_grid", "second_moment_s", "residual_s", "gammas", "q_grid", "q_ext", "series_v", "series_t"})
        if (has(k))
            for (double x : nums(k))
                if (!(x > 0)) fail(std::string("'") + k + "' entries must be positive");
    if (has("s_grid")) {
        auto g = nums("s_grid");
        for (size_t i = 1; i < g.size(); ++i)
            if (!(g[i] > g[i - 1])) fail("'s_grid' must be strictly increasing (eps strictly decreasing)");
        if (g.back() > 16) fail("'s_grid' is capped at 16");
    }
    if (has("eps_grid"))
        for (double x : nums("eps_grid"))
            if (!(x > 0 && x < 1)) fail("'eps_grid' entries must lie in (0, 1)");
    if (has("orders"))
        for (long n : ints("orders"))
            if (n < 1 || n > 6) fail("'orders' entries must lie in [1, 6]");
    if (has("n_trunc") && (integer("n_trunc") < 0 || integer("n_trunc") > 4)) fail("'n_trunc' must lie in [0, 4]");
    if (experiment_ == "multiscale" && (integer("n") < 0 || integer("n") > 2)) fail("'n' must lie in [0, 2]");
    if (experiment_ == "gmc" && integer("n") != 1 && integer("n") != 3) fail("'n' must be 1 or 3");
    if (experiment_ == "collar")
        for (long k : ints("k"))
            if (k < 0) fail("'k' entries must be nonnegative");
    if (experiment_ == "identities") {
        if (integer("n_max") < 1 || integer("n_max") > 16) fail("'n_max' must lie in [1, 16]");
        for (const char* k : {"two_var_n", "reexp_degree", "combi_n", "group_cap", "subgroup_cap"})
            if (integer(k) < 1 || integer(k) > 16) fail(std::string("'") + k + "' must lie in [1, 16]");
        for (long n : ints("nullspace_n"))
            if (n < 2 || n % 2) fail("'nullspace_n' entries must be even and at least 2");
    }
    if (has("parts")) {
        if (experiment_ == "fps-law") one_of("parts", {"mean", "ks"});
        if (experiment_ == "expansion")
            one_of("parts", {"expectation", "minkowski", "doubling", "second_moment", "residual"});
    }
    if (experiment_ == "sausage" && integer("mass_change_n") > 8) fail("'mass_change_n' must be at most 8");
}

}  // namespace wb
