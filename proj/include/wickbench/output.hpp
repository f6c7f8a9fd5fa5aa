#pragma once

// Result containers and the static writers: results.json, one CSV per
// table and SVG line plots.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wb {

using ojson = nlohmann::ordered_json;

struct CriterionResult {
    std::string tag;
    ojson value;   // number, or a small object for composite criteria
    ojson bound;   // number or [lo, hi]
    bool pass = false;
};

struct Table {
    std::string name;   // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Series {
    std::string label;
    std::vector<double> x, y;
};

struct Plot {
    std::string name, title, xlabel, ylabel;
    bool logx = false, logy = false;
    std::vector<Series> series;
};

struct ExperimentResult {
    std::string experiment;
    ojson config_echo;
    std::vector<CriterionResult> criteria;
    std::vector<Table> tables;
    std::vector<Plot> plots;
    bool all_pass() const;
    std::vector<std::string> failures() const;
};

std::string to_csv(const Table& t);
std::string to_svg(const Plot& p);
// results.json text; tables are listed by file name relative to the output directory.
std::string results_json(const ExperimentResult& r);
// Creates `dir` and writes everything; returns the path of results.json.
std::string write_outputs(const ExperimentResult& r, const std::string& dir);

}  // namespace wb
