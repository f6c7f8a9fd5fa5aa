// wickbench <experiment> --config <path> [--seed N] [--out DIR] [--workers K]
// wickbench run --config <path> ...      (experiment taken from the config)
// wickbench report <out_dir>
// wickbench selfcheck [--workers K] [--mutate]
//
// Exit codes: 0 all criteria pass, 1 some criterion failed, 2 config or usage error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wickbench/config.hpp"
#include "wickbench/experiments.hpp"
#include "wickbench/output.hpp"
#include "wickbench/parallel.hpp"

namespace {

struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> workers;
};

void add_run_flags(CLI::App* sub, RunArgs& a) {
    sub->add_option("--config", a.config, "TOML configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", a.seed, "master seed (overrides the config)");
    sub->add_option("--out", a.out, "output directory (overrides the config)");
    sub->add_option("--workers", a.workers, "worker threads (default: WICKBENCH_WORKERS or 1)")->check(CLI::PositiveNumber);
}

int workers_of(const std::optional<int>& w) { return w ? *w : wb::default_workers(); }

void print_failures(const wb::ExperimentResult& r) {
    wb::ojson f = wb::ojson::array();
    for (auto& c : r.criteria)
        if (!c.pass) f.push_back({{"tag", c.tag}, {"value", c.value}, {"bound", c.bound}});
    std::cerr << wb::ojson{{"experiment", r.experiment}, {"failures", f}}.dump(2) << "\n";
}

int finish(const wb::ExperimentResult& r, const std::string& dir) {
    auto path = wb::write_outputs(r, dir);
    for (auto& c : r.criteria) std::cout << (c.pass ? "PASS " : "FAIL ") << c.tag << " " << c.value.dump() << "\n";
    std::cout << "wrote " << path << "\n";
    if (r.all_pass()) return 0;
    print_failures(r);
    return 1;
}

int do_run(const RunArgs& a, const std::string& expected) {
    wb::Config cfg;
    try {
        cfg = wb::Config::load(a.config);
        if (!expected.empty() && cfg.experiment() != expected)
            throw wb::ConfigError("config is for experiment '" + cfg.experiment() + "', not '" + expected + "'");
        if (a.seed) cfg.set_seed(*a.seed);
        if (a.out) cfg.set_out_dir(*a.out);
    } catch (const wb::ConfigError& e) {
        std::cerr << wb::ojson{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }
    wb::RunOptions opt;
    opt.workers = workers_of(a.workers);
    try {
        return finish(wb::run_experiment(cfg, opt), cfg.out_dir());
    } catch (const wb::ConfigError& e) {
        std::cerr << wb::ojson{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wickbench: Wick renormalization and neighbourhood expansion experiments"};
    app.require_subcommand(1);

    std::map<std::string, RunArgs> per_exp;
    for (auto& name : wb::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        add_run_flags(sub, per_exp[name]);
    }
    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run the experiment named in the config");
    add_run_flags(run, run_args);

    std::string report_dir;
    auto* report = app.add_subcommand("report", "summarize results.json in an output directory");
    report->add_option("out_dir", report_dir, "output directory")->required();

    std::optional<int> sc_workers;
    std::string sc_out;
    bool mutate = false;
    auto* self = app.add_subcommand("selfcheck", "exact identity suite plus Monte Carlo smoke runs");
    self->add_option("--workers", sc_workers)->check(CLI::PositiveNumber);
    self->add_option("--out", sc_out, "also write results to this directory");
    self->add_flag("--mutate", mutate, "perturb one Hermite coefficient (the suite must fail)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) return do_run(run_args, "");
        for (auto& [name, a] : per_exp)
            if (*app.get_subcommand(name)) return do_run(a, name);
        if (*report) {
            try {
                std::cout << wb::report_text(report_dir);
                return 0;
            } catch (const std::runtime_error& e) {
                std::cerr << e.what() << "\n";
                return 2;
            }
        }
        if (*self) {
            wb::Families fam;
            if (mutate)
                fam.hermite = [](int n) {
                    auto p = wb::hermite_q(n);
                    if (n == 4) p.add({0, 2}, wb::Rational(1, 7));
                    return p;
                };
            wb::RunOptions opt;
            opt.workers = workers_of(sc_workers);
            auto r = wb::run_selfcheck(fam, opt);
            if (!sc_out.empty()) return finish(r, sc_out);
            for (auto& c : r.criteria) std::cout << (c.pass ? "PASS " : "FAIL ") << c.tag << " " << c.value.dump() << "\n";
            if (r.all_pass()) return 0;
            print_failures(r);
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
