#include "wickbench/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wb {

namespace {

std::string fmt(double x, const char* format = "%.17g") {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

// Axis mapping with optional log scale and "nice" tick positions.
struct Axis {
    double lo, hi;
    bool log;
    double map(double v, double a, double b) const {
        double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
        return a + t * (b - a);
    }
    std::vector<double> ticks() const {
        std::vector<double> t;
        if (log) {
            for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1) {
                for (double m : {1.0, 2.0, 5.0}) {
                    double v = m * std::pow(10.0, e);
                    if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) t.push_back(v);
                }
            }
            if (t.size() < 2) t = {lo, hi};
            return t;
        }
        double span = hi - lo, step = std::pow(10.0, std::floor(std::log10(span / 5)));
        if (span / step > 10) step *= 2;
        if (span / step > 10) step *= 2.5;
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) t.push_back(v);
        return t;
    }
};

Axis make_axis(const std::vector<double>& vals, bool log) {
    double lo = INFINITY, hi = -INFINITY;
    for (double v : vals) {
        if (!std::isfinite(v) || (log && v <= 0)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) {
        lo = log ? 0.1 : 0.0;
        hi = 1.0;
    }
    if (hi <= lo) {
        double d = log ? 2.0 : std::max(1.0, std::abs(lo)) * 0.1;
        lo = log ? lo / d : lo - d;
        hi = log ? hi * d : hi + d;
    } else if (log) {
        lo /= 1.1;
        hi *= 1.1;
    } else {
        double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    return {lo, hi, log};
}

}  // namespace

bool ExperimentResult::all_pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
}

std::vector<std::string> ExperimentResult::failures() const {
    std::vector<std::string> f;
    for (auto& c : criteria)
        if (!c.pass) f.push_back(c.tag);
    return f;
}

std::string to_csv(const Table& t) {
    std::ostringstream os;
    for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (auto& row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
        os << "\n";
    }
    return os.str();
}

std::string to_svg(const Plot& p) {
    const double W = 640, H = 420, L = 80, R = 170, T = 40, B = 60;
    std::vector<double> xs, ys;
    for (auto& s : p.series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    Axis ax = make_axis(xs, p.logx), ay = make_axis(ys, p.logy);
    auto X = [&](double v) { return ax.map(v, L, W - R); };
    auto Y = [&](double v) { return ay.map(v, H - B, T); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(p.title) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - R - L << "\" height=\"" << H - B - T
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ax.ticks()) {
        double x = X(t);
        os << "<line x1=\"" << fmt(x, "%.2f") << "\" y1=\"" << H - B << "\" x2=\"" << fmt(x, "%.2f") << "\" y2=\"" << H - B + 5
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(x, "%.2f") << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << fmt(t, "%.3g") << "</text>\n";
    }
    for (double t : ay.ticks()) {
        double y = Y(t);
        os << "<line x1=\"" << L - 5 << "\" y1=\"" << fmt(y, "%.2f") << "\" x2=\"" << L << "\" y2=\"" << fmt(y, "%.2f")
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << L - 8 << "\" y=\"" << fmt(y + 4, "%.2f") << "\" text-anchor=\"end\">" << fmt(t, "%.3g") << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xml_escape(p.xlabel) << "</text>\n";
    os << "<text transform=\"translate(18," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(p.ylabel)
       << "</text>\n";
    for (size_t k = 0; k < p.series.size(); ++k) {
        auto& s = p.series[k];
        const char* c = colors[k % 7];
        std::string pts;
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if ((p.logx && s.x[i] <= 0) || (p.logy && s.y[i] <= 0)) continue;
            double x = X(s.x[i]), y = Y(s.y[i]);
            pts += fmt(x, "%.2f") + "," + fmt(y, "%.2f") + " ";
            os << "<circle cx=\"" << fmt(x, "%.2f") << "\" cy=\"" << fmt(y, "%.2f") << "\" r=\"3\" fill=\"" << c << "\"/>\n";
        }
        os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\"/>\n";
        double ly = T + 14 + 16 * k;
        os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 32 << "\" y2=\"" << ly - 4
           << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - R + 38 << "\" y=\"" << ly << "\">" << xml_escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string results_json(const ExperimentResult& r) {
    ojson j;
    j["experiment"] = r.experiment;
    j["config_echo"] = r.config_echo;
    j["criteria"] = ojson::array();
    for (auto& c : r.criteria) {
        ojson e;
        e["tag"] = c.tag;
        e["value"] = c.value;
        e["bound"] = c.bound;
        e["pass"] = c.pass;
        j["criteria"].push_back(e);
    }
    j["tables"] = ojson::array();
    for (auto& t : r.tables) j["tables"].push_back(t.name + ".csv");
    return j.dump(2) + "\n";
}

std::string write_outputs(const ExperimentResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (auto& t : r.tables) write_file(fs::path(dir) / (t.name + ".csv"), to_csv(t));
    for (auto& p : r.plots) write_file(fs::path(dir) / (p.name + ".svg"), to_svg(p));
    auto path = fs::path(dir) / "results.json";
    write_file(path, results_json(r));
    return path.string();
}

}  // namespace wb
