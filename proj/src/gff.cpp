#include "wickbench/gff.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "wickbench/parallel.hpp"
#include "wickbench/polyseq.hpp"

namespace wb {

void MeanAcc::merge(const MeanAcc& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    long n = n_ + o.n_;
    double d = o.mean_ - mean_;
    mean_ += d * o.n_ / n;
    m2_ += o.m2_ + d * d * double(n_) * o.n_ / n;
    n_ = n;
}

FieldSample sample_gff(const GreenTable& G, double v, std::uint64_t seed, std::uint64_t index) {
    Rng rng = make_stream(seed, index, StreamTag::gff);
    Normal N;
    const int n = G.domain().n();
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) xi[i] = N(rng);
    Eigen::VectorXd x = G.correlate(xi);
    FieldSample s;
    s.values.resize(n);
    for (int i = 0; i < n; ++i) s.values[i] = v + x[i];
    s.boundary_value = v;
    s.seed = seed;
    s.index = index;
    return s;
}

std::vector<double> wick_power(const FieldSample& s, const GreenTable& G, int n) {
    if (n < 1) throw std::invalid_argument("wick_power: n must be >= 1");
    BiPolyEval q(hermite_q(n));
    std::vector<double> out(s.values.size());
    for (size_t z = 0; z < out.size(); ++z) out[z] = q(s.values[z], G.diag()[z]);
    return out;
}

std::vector<PairStat> wick_cov_check(const GreenTable& G, int n, int m, const std::vector<std::pair<int, int>>& pairs,
                                     std::uint64_t seed, long first, long count) {
    BiPolyEval qn(hermite_q(n)), qm(hermite_q(m));
    std::vector<MeanAcc> acc(pairs.size());
    const auto& g = G.diag();
    for (long i = first; i < first + count; ++i) {
        auto s = sample_gff(G, 0.0, seed, i);
        for (size_t p = 0; p < pairs.size(); ++p) {
            auto [z, w] = pairs[p];
            acc[p].add(qn(s.values[z], g[z]) * qm(s.values[w], g[w]));
        }
    }
    std::vector<PairStat> out;
    for (size_t p = 0; p < pairs.size(); ++p) {
        auto [z, w] = pairs[p];
        double theo = n == m ? std::tgamma(n + 1.0) * std::pow(G(z, w), n) : 0.0;
        out.push_back({z, w, acc[p].mean(), theo, acc[p].se()});
    }
    return out;
}

std::vector<OrderPairStats> wick_cov_table(const GreenTable& G, const std::vector<int>& orders,
                                           const std::vector<std::pair<int, int>>& pairs, std::uint64_t seed,
                                           long count, int workers, long chunk) {
    std::vector<std::pair<int, int>> combos;
    for (size_t i = 0; i < orders.size(); ++i)
        for (size_t j = i; j < orders.size(); ++j) combos.push_back({orders[i], orders[j]});
    std::vector<BiPolyEval> q;
    int top = 0;
    for (int n : orders) {
        if (n < 1) throw std::invalid_argument("wick_cov_table: orders must be >= 1");
        top = std::max(top, n);
    }
    for (int n = 0; n <= top; ++n) q.emplace_back(hermite_q(n));
    const auto& g = G.diag();
    const size_t np = pairs.size();
    auto parts = parallel_chunks(count, chunk, workers, [&](long b, long e) {
        std::vector<MeanAcc> acc(combos.size() * np);
        std::vector<double> qz(top + 1), qw(top + 1);
        for (long i = b; i < e; ++i) {
            auto s = sample_gff(G, 0.0, seed, i);
            for (size_t p = 0; p < np; ++p) {
                auto [z, w] = pairs[p];
                for (int n = 1; n <= top; ++n) {
                    qz[n] = q[n](s.values[z], g[z]);
                    qw[n] = q[n](s.values[w], g[w]);
                }
                for (size_t c = 0; c < combos.size(); ++c) acc[c * np + p].add(qz[combos[c].first] * qw[combos[c].second]);
            }
        }
        return acc;
    });
    std::vector<MeanAcc> acc(combos.size() * np);
    for (auto& part : parts)
        for (size_t k = 0; k < acc.size(); ++k) acc[k].merge(part[k]);
    std::vector<OrderPairStats> out;
    for (size_t c = 0; c < combos.size(); ++c) {
        auto [n, m] = combos[c];
        OrderPairStats o{n, m, {}};
        for (size_t p = 0; p < np; ++p) {
            auto [z, w] = pairs[p];
            double theo = n == m ? std::tgamma(n + 1.0) * std::pow(G(z, w), n) : 0.0;
            o.stats.push_back({z, w, acc[c * np + p].mean(), theo, acc[c * np + p].se()});
        }
        out.push_back(std::move(o));
    }
    return out;
}

double hermite_he(int n, double x) {
    if (n == 0) return 1.0;
    double a = 1.0, b = x;
    for (int k = 1; k < n; ++k) {
        double c = x * b - k * a;
        a = b;
        b = c;
    }
    return b;
}

std::vector<double> gmc_germ_field(const std::vector<double>& vA, double gamma, int n) {
    if (!(gamma > 0)) throw std::invalid_argument("gmc_germ_field: gamma must be positive");
    std::vector<double> out(vA.size(), 0.0);
    for (size_t z = 0; z < vA.size(); ++z) {
        double V = vA[z];
        if (std::isnan(V)) continue;
        V = std::max(V, 0.0);
        out[z] = hermite_he(n, gamma * std::sqrt(V)) * std::pow(V, 0.5 * n) * std::exp(-0.5 * gamma * gamma * V);
    }
    return out;
}

}  // namespace wb
