#pragma once

// Discrete GFF with constant boundary value, lattice Wick powers and the
// small-gamma GMC germ fields.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "wickbench/lattice.hpp"
#include "wickbench/rng.hpp"

namespace wb {

struct FieldSample {
    std::vector<double> values;
    double boundary_value = 0.0;
    std::uint64_t seed = 0, index = 0;
};

// values = v + L^{-T} xi, xi drawn from the (seed, index) gff stream.
FieldSample sample_gff(const GreenTable& G, double v, std::uint64_t seed, std::uint64_t index);

// Q_n(Phi(z), G(z,z)) per vertex.
std::vector<double> wick_power(const FieldSample& s, const GreenTable& G, int n);

struct PairStat {
    int z, w;
    double empirical, theoretical, se;
    double z_score() const { return se > 0 ? (empirical - theoretical) / se : 0.0; }
};

// Streaming mean and standard error of a scalar.
class MeanAcc {
public:
    void add(double x) {
        ++n_;
        double d = x - mean_;
        mean_ += d / n_;
        m2_ += d * (x - mean_);
    }
    void merge(const MeanAcc& o);
    long count() const { return n_; }
    double mean() const { return mean_; }
    double var() const { return n_ > 1 ? m2_ / (n_ - 1) : 0.0; }
    double se() const { return n_ > 1 ? std::sqrt(var() / n_) : 0.0; }

private:
    long n_ = 0;
    double mean_ = 0.0, m2_ = 0.0;
};

// E[Q_n(X_z, G_zz) Q_m(X_w, G_ww)] for the centred field; theoretical value
// n! G(z,w)^n when n == m, else 0. Samples [first, first + count).
std::vector<PairStat> wick_cov_check(const GreenTable& G, int n, int m, const std::vector<std::pair<int, int>>& pairs,
                                     std::uint64_t seed, long first, long count);

struct OrderPairStats {
    int n, m;
    std::vector<PairStat> stats;
};
// Same for every order pair n <= m drawn from `orders`, from one pass over
// the samples. Chunked over workers; the reduction order is fixed.
std::vector<OrderPairStats> wick_cov_table(const GreenTable& G, const std::vector<int>& orders,
                                           const std::vector<std::pair<int, int>>& pairs, std::uint64_t seed,
                                           long count, int workers = 1, long chunk = 256);

// H_n(gamma sqrt(V)) V^{n/2} exp(-gamma^2 V / 2); zero where V is NaN (on A).
std::vector<double> gmc_germ_field(const std::vector<double>& vA, double gamma, int n);

// Probabilists' Hermite polynomial H_n(x) = Q_n(x, 1).
double hermite_he(int n, double x);

}  // namespace wb
