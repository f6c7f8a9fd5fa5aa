#include <cmath>
#include <random>

#include "doctest.h"
#include "wickbench/gff.hpp"
#include "wickbench/polyseq.hpp"

using namespace wb;

TEST_CASE("sample_gff moments and determinism") {
    auto d = GridDomain::disk_across(33);
    GreenTable G(d);
    auto a = sample_gff(G, 0.7, 42, 5), b = sample_gff(G, 0.7, 42, 5), c = sample_gff(G, 0.7, 42, 6);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);

    std::mt19937_64 pick(1);
    std::uniform_int_distribution<int> U(0, d.n() - 1);
    std::vector<int> verts;
    for (int i = 0; i < 10; ++i) verts.push_back(U(pick));
    const long N = 10000;
    const double v = 0.7;
    std::vector<MeanAcc> mean(10), sq(10);
    for (long i = 0; i < N; ++i) {
        auto s = sample_gff(G, v, 3, i);
        for (int k = 0; k < 10; ++k) {
            double x = s.values[verts[k]] - v;
            mean[k].add(x);
            sq[k].add(x * x);
        }
    }
    for (int k = 0; k < 10; ++k) {
        CHECK(std::abs(mean[k].mean()) < 3 * mean[k].se());
        CHECK(std::abs(sq[k].mean() - G.diag()[verts[k]]) < 3 * sq[k].se());
    }
}

TEST_CASE("wick powers") {
    auto d = GridDomain::disk_across(33);
    GreenTable G(d);
    auto s = sample_gff(G, 0.5, 1, 0);
    CHECK(wick_power(s, G, 1) == s.values);
    CHECK_THROWS(wick_power(s, G, 0));

    // E[:Phi^n:] = v^n
    std::vector<int> verts;
    for (int k = 0; k < 10; ++k) verts.push_back((k * 977) % d.n());
    const double v = 0.8;
    const long N = 10000;
    std::vector<std::vector<MeanAcc>> acc(5, std::vector<MeanAcc>(10));
    std::vector<BiPolyEval> q;
    for (int n = 0; n <= 4; ++n) q.emplace_back(hermite_q(n));
    for (long i = 0; i < N; ++i) {
        auto f = sample_gff(G, v, 11, i);
        for (int n = 1; n <= 4; ++n)
            for (int k = 0; k < 10; ++k) acc[n][k].add(q[n](f.values[verts[k]], G.diag()[verts[k]]));
    }
    for (int n = 1; n <= 4; ++n)
        for (int k = 0; k < 10; ++k) CHECK(std::abs(acc[n][k].mean() - std::pow(v, n)) < 3 * acc[n][k].se());
}

TEST_CASE("Wick product estimator on a correlated pair") {
    // X, Y standard normal with correlation rho: E[Q_2(X,1) Q_2(Y,1)] = 2 rho^2
    std::mt19937_64 rng(9);
    std::normal_distribution<double> N;
    BiPolyEval q2(hermite_q(2)), q3(hermite_q(3));
    for (double rho : {0.0, 0.3, 0.8}) {
        MeanAcc a22, a23;
        for (int i = 0; i < 200000; ++i) {
            double x = N(rng), y = rho * x + std::sqrt(1 - rho * rho) * N(rng);
            a22.add(q2(x, 1) * q2(y, 1));
            a23.add(q2(x, 1) * q3(y, 1));
        }
        CHECK(std::abs(a22.mean() - 2 * rho * rho) < 4 * a22.se());
        CHECK(std::abs(a23.mean()) < 4 * a23.se());
    }
}

TEST_CASE("wick_cov_check on the lattice") {
    auto d = GridDomain::disk_across(17);
    GreenTable G(d);
    const int c = d.center();
    std::vector<std::pair<int, int>> pairs{{c, c}, {c, d.nbr(c, 0)}, {c, d.nbr(d.nbr(c, 1), 1)}};
    for (int n = 1; n <= 3; ++n)
        for (auto& p : wick_cov_check(G, n, n, pairs, 5, 0, 20000)) CHECK(std::abs(p.z_score()) < 4);
    for (auto& p : wick_cov_check(G, 2, 3, pairs, 6, 0, 20000)) {
        CHECK(p.theoretical == 0.0);
        CHECK(std::abs(p.z_score()) < 4);
    }
}

TEST_CASE("MeanAcc merge") {
    MeanAcc all, a, b;
    for (int i = 0; i < 100; ++i) {
        double x = std::sin(i * 1.7);
        all.add(x);
        (i < 37 ? a : b).add(x);
    }
    a.merge(b);
    CHECK(a.count() == 100);
    CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
    CHECK(a.var() == doctest::Approx(all.var()).epsilon(1e-12));
}

TEST_CASE("GMC germs") {
    for (int n = 0; n <= 6; ++n)
        for (double x : {-1.3, 0.0, 0.4, 2.5}) CHECK(hermite_he(n, x) == doctest::Approx(BiPolyEval(hermite_q(n))(x, 1.0)));
    std::vector<double> V{0.5, 1.0, std::nan(""), 2.0};
    auto g = gmc_germ_field(V, 50.0, 1);
    for (double x : g) CHECK(std::abs(x) < 1e-100);
    auto g2 = gmc_germ_field(V, 1e-4, 2);
    CHECK(g2[2] == 0.0);
    for (int k : {0, 1, 3}) CHECK(g2[k] == doctest::Approx(-V[k]).epsilon(1e-6));
    auto g1 = gmc_germ_field(V, 0.3, 1);
    CHECK(g1[0] == doctest::Approx(0.3 * 0.5 * std::exp(-0.5 * 0.09 * 0.5)));
    CHECK_THROWS(gmc_germ_field(V, 0.0, 1));
}
