#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "wickbench/sets.hpp"
#include "wickbench/special.hpp"

using namespace wb;
using std::numbers::pi;

namespace {

// First-passage density of a unit Brownian bridge from alpha > 0 to beta at
// level 0: hitting density of 0 from alpha times the transition density to
// beta over the remaining time, divided by the bridge normalisation.
double bridge_hit_density(double alpha, double beta, double t) {
    double hit = alpha / std::sqrt(2 * pi * t * t * t) * std::exp(-alpha * alpha / (2 * t));
    double rest = std::exp(-beta * beta / (2 * (1 - t))) / std::sqrt(2 * pi * (1 - t));
    double norm = std::exp(-(alpha - beta) * (alpha - beta) / 2) / std::sqrt(2 * pi);
    return hit * rest / norm;
}

}  // namespace

TEST_CASE("bridge crossing law") {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    for (double alpha : {0.3, 1.0, 2.0})
        for (double beta : {-0.7, 0.2, 1.1}) {
            double total = GK::integrate([&](double t) { return bridge_hit_density(alpha, beta, t); }, 0.0, 1.0, 10, 1e-12);
            CHECK(total == doctest::Approx(bridge_touch_prob(alpha, beta)).epsilon(1e-8));
            for (double u : {0.1, 0.5, 0.9}) {
                double t = bridge_first_hit(alpha, beta, u);
                CHECK(t > 0);
                CHECK(t < 1);
                double mass = GK::integrate([&](double s) { return bridge_hit_density(alpha, beta, s); }, 0.0, t, 10, 1e-12);
                CHECK(mass / total == doctest::Approx(u).epsilon(1e-6));
            }
        }
    CHECK(bridge_touch_prob(-1, 2) == 1.0);
    CHECK(bridge_first_hit(0.0, 1.0, 0.5) == 0.0);
}

TEST_CASE("extract_fps limits and monotonicity") {
    auto d = GridDomain::disk_across(33);
    GreenTable G(d);
    auto s = sample_gff(G, 1.0, 4, 0);
    auto u = edge_uniforms(d, 4, 0);
    CHECK_THROWS(extract_fps(s, d, 1.0, u));
    double mx = *std::max_element(s.values.begin(), s.values.end());
    FieldSample low = s;
    low.boundary_value = mx + 10;
    CHECK(extract_fps(low, d, mx + 1e-9, u).size() == 0);
    CHECK(extract_fps(s, d, -1e6, u).size() == d.n());

    std::vector<char> prev(d.n(), 0);
    for (double a : {0.9, 0.5, 0.0, -0.5, -1.0}) {
        auto f = extract_fps(s, d, a, u);
        for (int z = 0; z < d.n(); ++z) {
            if (prev[z]) CHECK(f.in_a[z]);
            if (f.in_a[z]) CHECK(s.values[z] >= a);
        }
        prev = f.in_a;
    }
}

TEST_CASE("FPS mean measure identity") {
    auto d = GridDomain::disk_across(33);
    GreenTable G(d);
    MeanAcc m;
    for (long i = 0; i < 2000; ++i) {
        auto s = sample_gff(G, 1.0, 8, i);
        auto f = extract_fps(s, d, 0.0, edge_uniforms(d, 8, i));
        m.add(f.mass(s, d));
    }
    CHECK(std::abs(m.mean() - d.area()) < 3 * m.se());
}

TEST_CASE("V_A law at the centre in metric mode") {
    // P(V_A(z) > t or z in A) = erf(v / sqrt(2 t)) for t < G_D(z,z)
    auto d = GridDomain::disk_across(33);
    GreenTable G(d);
    const int z = d.center();
    const double v = 0.1;
    std::vector<double> ts{0.02, 0.05, 0.1, 0.3};
    std::vector<MeanAcc> acc(ts.size());
    for (long i = 0; i < 3000; ++i) {
        auto s = sample_gff(G, v, 12, i);
        auto f = extract_fps(s, d, 0.0, edge_uniforms(d, 12, i));
        double V = v_at_vertex(f, G, z, VMode::metric);
        for (size_t k = 0; k < ts.size(); ++k) acc[k].add(std::isnan(V) || V > ts[k]);
    }
    for (size_t k = 0; k < ts.size(); ++k)
        CHECK(std::abs(acc[k].mean() - std::erf(v / std::sqrt(2 * ts[k]))) < 3 * acc[k].se());
}

TEST_CASE("neighbourhood masks") {
    auto d = GridDomain::disk_across(33);
    GreenTable G(d);
    auto s = sample_gff(G, 0.3, 2, 1);
    auto f = extract_fps(s, d, 0.0, edge_uniforms(d, 2, 1));
    CHECK_THROWS(neighborhood(f, 0.5));
    compute_v(f, G, VMode::metric);
    auto m1 = neighborhood(f, 1.0);
    for (int z = 0; z < d.n(); ++z) {
        if (f.in_a[z]) {
            CHECK(!m1.mask[z]);
            CHECK(m1.with_a[z]);
        } else {
            CHECK(m1.mask[z] == (f.v_values[z] > 0));
        }
    }
    double prev = m1.area(d, false);
    auto prev_mask = m1.mask;
    for (double eps : {0.9, 0.7, 0.5, 0.3, 0.1}) {
        auto m = neighborhood(f, eps);
        for (int z = 0; z < d.n(); ++z)
            if (m.mask[z]) CHECK(prev_mask[z]);
        CHECK(m.area(d, false) <= prev);
        prev = m.area(d, false);
        prev_mask = m.mask;
        auto t = tilde_neighborhood(f, d, [&](int z) { return eps * d.cr(z); });
        CHECK(t.mask == m.mask);
    }
    auto all = tilde_neighborhood(f, d, [](int) { return 1.5; });
    for (int z = 0; z < d.n(); ++z) CHECK(all.mask[z] == !f.in_a[z]);
    auto sq = GridDomain::square(1.0, 0.125);
    GreenTable Gs(sq);
    auto s2 = sample_gff(Gs, 0.3, 2, 1);
    auto f2 = extract_fps(s2, sq, 0.0, edge_uniforms(sq, 2, 1));
    compute_v(f2, Gs, VMode::metric);
    CHECK_THROWS(tilde_neighborhood(f2, sq, [](int) { return 0.5; }));
}

TEST_CASE("sign clusters") {
    auto d = GridDomain::disk_across(33);
    GreenTable G(d);
    MeanAcc plus;
    for (long i = 0; i < 200; ++i) {
        auto s = sample_gff(G, 0.0, 21, i);
        auto cs = extract_sign_clusters(s, d, edge_uniforms(d, 21, i));
        long total = 0;
        double abs_sum = 0, signed_sum = 0;
        for (int c = 0; c < cs.count(); ++c) {
            total += cs.members[c].size();
            for (int z : cs.members[c]) {
                CHECK(cs.label[z] == c);
                CHECK((s.values[z] > 0) == (cs.sign[c] > 0));
                abs_sum += std::abs(s.values[z]);
                signed_sum += cs.sign[c] * s.values[z];
            }
            plus.add(cs.sign[c] > 0);
        }
        CHECK(total == d.n());
        CHECK(signed_sum == doctest::Approx(abs_sum));
        group_generations(cs, d);
        for (int g : cs.generation) CHECK(g >= 0);
    }
    CHECK(std::abs(plus.mean() - 0.5) < 3 * plus.se());
    auto s = sample_gff(G, 0.5, 21, 0);
    CHECK_THROWS(extract_sign_clusters(s, d, edge_uniforms(d, 21, 0)));
}

TEST_CASE("generations of nested annuli") {
    auto d = GridDomain::disk_across(65);
    FieldSample s;
    s.values.resize(d.n());
    for (int z = 0; z < d.n(); ++z) {
        double r = std::hypot(d.x(z), d.y(z));
        s.values[z] = r < 0.2 ? 1.0 : r < 0.5 ? -1.0 : 1.0;
    }
    std::vector<double> u(d.n_edges(), 1.0);
    auto cs = extract_sign_clusters(s, d, u);
    REQUIRE(cs.count() == 3);
    group_generations(cs, d);
    auto gen_at = [&](double x) { return cs.generation[cs.label[d.index(static_cast<int>(std::lround(x / d.h())), 0)]]; };
    CHECK(gen_at(0.0) == 2);
    CHECK(gen_at(0.35) == 1);
    CHECK(gen_at(0.8) == 0);
}
