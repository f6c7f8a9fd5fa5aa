#pragma once

// Experiment drivers behind the command line: each turns a validated
// Config into criteria, tables and plots.

#include <string>

#include "wickbench/config.hpp"
#include "wickbench/output.hpp"
#include "wickbench/polyseq.hpp"

namespace wb {

struct RunOptions {
    int workers = 1;
};

ExperimentResult run_experiment(const Config& cfg, const RunOptions& opt = {});

// Exact identity suite plus small Monte Carlo smoke runs. `fam` lets tests
// inject a corrupted polynomial family.
ExperimentResult run_selfcheck(const Families& fam = {}, const RunOptions& opt = {});

// One-line meaning of a criterion tag (empty if unknown).
std::string criterion_description(const std::string& tag);

// Text summary of <out_dir>/results.json; throws std::runtime_error if absent.
std::string report_text(const std::string& out_dir);

}  // namespace wb
