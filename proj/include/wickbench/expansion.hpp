#pragma once

// Monte Carlo side of the neighbourhood expansions: expectation checks,
// Minkowski and multi-scale psi estimators, GMC germ cross-validation,
// second moments, collar divergence and Sobolev residuals.
//
// Units. The lattice carries a small level gap: boundary value delta * v
// and level delta * a. A continuum threshold t on V_A (v of order one)
// becomes delta^2 t on the lattice, gamma becomes gamma / delta and
// masses of the FPS measure are divided by delta. All inputs and outputs
// below are in continuum units.

#include <cstdint>
#include <vector>

#include "wickbench/gff.hpp"
#include "wickbench/lattice.hpp"
#include "wickbench/sets.hpp"

namespace wb {

struct FpsSetup {
    const GreenTable* G = nullptr;
    double v = 1.0, a = 0.0;
    double delta = 0.05;
    VMode mode = VMode::metric;
    std::uint64_t seed = 0;
    int workers = 1;
    long chunk = 16;

    const GridDomain& dom() const { return G->domain(); }
    double units() const { return delta * delta; }
};

struct FpsDraw {
    FieldSample field;
    FirstPassageSet fps;   // v_values in lattice units
};

// Sample `index` of the setup; full_v computes V_A on every vertex.
FpsDraw draw_fps(const FpsSetup& st, long index, bool full_v);

// Per-vertex density of the lattice FPS measure, (Phi - a)/delta on A.
std::vector<double> fps_measure_density(const FpsSetup& st, const FpsDraw& d);

// (1/2pi)|log eps| <-> eps
double eps_of(double s);
double loge_over_2pi(double eps);

// Fraction of the vertex set in a mask.
double mask_area(const GridDomain& dom, const std::vector<char>& m);

struct ExpectationRow {
    double s;
    double p_emp, p_se;      // mask including A
    double p_emp_excl;       // mask excluding A
    double closed;           // erf(v / sqrt(2 s))
    double series;           // truncated series
    double next_bound;       // first omitted term
};
std::vector<ExpectationRow> expectation_check(const FpsSetup& st, const std::vector<double>& s_grid, long samples,
                                              int n_trunc);

struct MinkowskiRow {
    double s;
    double mink, se;            // (1/2)|log eps|^{1/2} E[area], mask with A
    double mink_excl, se_excl;  // mask without A
    double expected;            // (1/2)|log eps|^{1/2} erf(v/sqrt(2s)) Leb(D)
};
struct MinkowskiReport {
    std::vector<MinkowskiRow> rows;
    std::vector<double> ratios;  // mink(s_{j+1}) / mink(s_j)
    double mass, mass_se;        // lattice FPS measure of D
};
MinkowskiReport minkowski_leading(const FpsSetup& st, const std::vector<double>& s_grid, long samples);

struct PsiEstimate {
    int order;                          // 2n + 1
    double base_s;
    std::vector<double> alphas, coeffs;
    std::vector<double> field, var;     // per-vertex mean and variance
    double total, total_se;             // (psi, 1)
};
// Vandermonde combination of masks at thresholds alpha_i * base_s.
PsiEstimate multiscale_psi(const FpsSetup& st, double base_s, const std::vector<double>& alphas, int n, long samples);

// prefactor (-1)^n 2^n n! (n+1/2) / (2pi)^n |log eps|^{n+1/2} with |log eps| = 2 pi s
double psi_prefactor(int n, double s);

struct GmcRow {
    double gamma;
    double germ_mass, germ_se;
    double gap, gap_se;   // germ mass - psi mass on the same samples
};
struct GmcReport {
    int n;
    double psi_mass, psi_se;
    std::vector<GmcRow> rows;
    bool shrinking;       // |gap| decreases along the gamma grid
};
// gamma grid in decreasing order. n odd; psi_{n} from multiscale_psi with
// the given base and alphas (alphas = {1} for n = 1).
GmcReport gmc_cross_validate(const FpsSetup& st, const std::vector<double>& gammas, int n, double psi_base_s,
                             const std::vector<double>& alphas, long samples);

struct EvenGermReport {
    std::vector<int> vertices;
    std::vector<double> median_rel_dev;   // median over samples of |germ/(-V) - 1|
    std::vector<long> n_defined;
};
EvenGermReport gmc_even_pointwise(const FpsSetup& st, double gamma, const std::vector<int>& vertices, long samples);

// Smooth bump exp(-1/(1 - r^2/rho^2)) around (cx, cy), zero beyond rho.
std::vector<double> bump(const GridDomain& dom, double cx, double cy, double rho);

struct SecondMomentRow {
    double s;
    double m2, m2_se;          // E[(1_N, f1)(1_N, f2)]
    double scaled;             // |log eps| * m2
};
struct SecondMomentReport {
    std::vector<SecondMomentRow> rows;
    double leading, leading_se;      // 4 E[(nu, f1)(nu, f2)], Minkowski proxy at the finest s
    double leading_measure, leading_measure_se;  // same with the lattice FPS measure
    double slope, slope_hw;          // d log m2 / d log |log eps|
};
SecondMomentReport second_moment_leading(const FpsSetup& st, const std::vector<double>& f1, const std::vector<double>& f2,
                                         const std::vector<double>& s_grid, long samples);

struct CollarReport {
    int k;
    std::vector<double> q, mean, se;
    double slope, slope_hw;
    std::vector<double> q_ext, mean_ext;
    double slope_ext, slope_ext_hw;
};
// int_{V <= q} V^k over D \ A (V in continuum units), averaged over samples.
CollarReport collar_divergence(const FpsSetup& st, int k, const std::vector<double>& q_grid,
                               const std::vector<double>& q_ext, long samples);

struct ResidualRow {
    double s;
    double resid0, resid0_se;
    double resid1, resid1_se;
};
struct ResidualReport {
    double eta;
    std::vector<ResidualRow> rows;
    double slope0, slope0_hw, slope1, slope1_hw;
};
// RMS over samples of the H^{-eta} norm of 1_N minus the truncated
// expansion. psi_1 is the lattice FPS measure; psi_3 is the per-sample
// multi-scale estimate at thresholds (psi3_base, 2 psi3_base).
ResidualReport residual_report(const FpsSetup& st, const std::vector<double>& s_grid, double eta, double psi3_base,
                               long samples);

// Least-squares slope of log y against log x, with a batch-based half-width
// (two standard errors) when per-sample curves are supplied.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
struct SlopeFit {
    double slope, hw;
};
SlopeFit batch_slope(const std::vector<double>& x, const std::vector<std::vector<double>>& per_sample, int batches = 10);

}  // namespace wb
