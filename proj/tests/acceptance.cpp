// Acceptance suite: one PASS/FAIL line per numbered criterion, using the
// shipped configs. `acceptance --criterion 4` runs a single criterion.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wickbench/config.hpp"
#include "wickbench/experiments.hpp"
#include "wickbench/output.hpp"
#include "wickbench/parallel.hpp"

#ifndef WICKBENCH_CONFIG_DIR
#error "WICKBENCH_CONFIG_DIR must point at configs/"
#endif

using namespace wb;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

Config load(const std::string& name) { return Config::load(std::string(WICKBENCH_CONFIG_DIR) + "/" + name + ".toml"); }

RunOptions options() {
    RunOptions o;
    o.workers = default_workers();
    return o;
}

struct Timed {
    ExperimentResult r;
    double seconds;
};

Timed timed_run(const Config& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = run_experiment(cfg, options());
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(r), s};
}

// All criteria whose tag starts with one of the prefixes must pass; at least one must exist.
Outcome check(const ExperimentResult& r, const std::vector<std::string>& prefixes) {
    std::ostringstream os;
    bool ok = true;
    int seen = 0;
    for (auto& c : r.criteria) {
        bool hit = false;
        for (auto& p : prefixes) hit = hit || c.tag.rfind(p, 0) == 0;
        if (!hit) continue;
        ++seen;
        ok = ok && c.pass;
        if (seen > 1) os << "; ";
        os << c.tag << "=" << c.value.dump() << (c.pass ? "" : " (bound " + c.bound.dump() + ")");
    }
    if (seen == 0) return {false, "no matching criteria"};
    return {ok, os.str()};
}

Outcome with_time(Outcome o, double seconds, double limit) {
    std::ostringstream os;
    os << o.detail << "; runtime " << seconds << " s (limit " << limit << " s)";
    return {o.pass && seconds <= limit, os.str()};
}

std::string bytes_of(const ExperimentResult& r) {
    std::string s = results_json(r);
    for (auto& t : r.tables) s += to_csv(t);
    for (auto& p : r.plots) s += to_svg(p);
    return s;
}

Outcome criterion_13() {
    auto cfg = load("determinism");
    RunOptions one, four;
    four.workers = 4;
    auto a = bytes_of(run_experiment(cfg, one));
    auto b = bytes_of(run_experiment(cfg, one));
    auto c = bytes_of(run_experiment(cfg, four));
    // and through the files actually written
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "wickbench_acceptance_13";
    fs::remove_all(dir);
    auto p1 = write_outputs(run_experiment(cfg, one), (dir / "w1").string());
    auto p4 = write_outputs(run_experiment(cfg, four), (dir / "w4").string());
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool files = slurp(p1) == slurp(p4) && !slurp(p1).empty();
    fs::remove_all(dir);
    bool ok = a == b && a == c && files;
    return {ok, std::string("repeat ") + (a == b ? "identical" : "differs") + ", workers 1 vs 4 " +
                    (a == c ? "identical" : "differs") + ", results.json files " + (files ? "identical" : "differ")};
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& criteria() {
    static const std::map<int, std::pair<std::string, std::function<Outcome()>>> m = {
        {1, {"exact identity suite",
             [] {
                 auto t = timed_run(load("identities"));
                 return with_time(check(t.r, {"identity.", "umbral.", "nullspace."}), t.seconds, 10);
             }}},
        {2, {"hitting-probability series", [] { return check(run_experiment(load("identities"), options()), {"series."}); }}},
        {3, {"Bessel functions and potential", [] { return check(run_experiment(load("identities"), options()), {"bessel."}); }}},
        {4, {"Wick covariance and orthogonality",
             [] {
                 auto t = timed_run(load("gff-cov"));
                 return with_time(check(t.r, {"wick."}), t.seconds, 180);
             }}},
        {5, {"FPS mean-measure identity",
             [] {
                 auto cfg = load("fps-law");
                 cfg.set("parts", ojson::array({"mean"}));
                 return check(run_experiment(cfg, options()), {"fps.mean_measure"});
             }}},
        {6, {"FPS conformal-radius law",
             [] {
                 auto cfg = load("fps-law");
                 cfg.set("parts", ojson::array({"ks"}));
                 cfg.set("vertex_diagnostic", false);
                 return check(run_experiment(cfg, options()), {"fps.cr_law."});
             }}},
        {7, {"expectation expansion",
             [] {
                 auto cfg = load("expansion");
                 cfg.set("parts", ojson::array({"expectation"}));
                 return check(run_experiment(cfg, options()), {"expansion.expectation", "expansion.truncation"});
             }}},
        {8, {"Minkowski leading order",
             [] {
                 auto cfg = load("expansion");
                 cfg.set("parts", ojson::array({"minkowski"}));
                 return check(run_experiment(cfg, options()), {"expansion.minkowski.ratios", "expansion.minkowski.mass"});
             }}},
        {9, {"multi-scale psi_3", [] { return check(run_experiment(load("multiscale"), options()), {"psi."}); }}},
        {10, {"collar divergence", [] { return check(run_experiment(load("collar"), options()), {"collar.k1", "collar.k2"}); }}},
        {11, {"GMC germ trend", [] { return check(run_experiment(load("gmc"), options()), {"gmc.odd_trend", "gmc.even_pointwise"}); }}},
        {12, {"Wiener sausage",
              [] {
                  auto t = timed_run(load("sausage"));
                  return with_time(check(t.r, {"sausage."}), t.seconds, 300);
              }}},
        {13, {"determinism", criterion_13}},
    };
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            only.insert(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: acceptance [--criterion N]...\n";
            return 2;
        }
    }
    int failed = 0;
    for (auto& [n, entry] : criteria()) {
        if (!only.empty() && !only.count(n)) continue;
        Outcome o;
        try {
            o = entry.second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s criterion %2d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, entry.first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
