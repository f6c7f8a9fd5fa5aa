#include <cmath>
#include <initializer_list>
#include <numbers>

#include "doctest.h"
#include "wickbench/special.hpp"

using namespace wb;
using std::numbers::pi;

namespace {

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt. The trapezoid rule
// converges geometrically for this analytic, doubly-decaying integrand.
double k_quadrature(double nu, double x) {
    const double h = 1.0 / 256;
    double s = 0.5 * std::exp(-x);
    for (int i = 1;; ++i) {
        double t = i * h;
        double f = std::exp(-x * std::cosh(t)) * std::cosh(nu * t);
        s += f;
        if (f < 1e-30) break;
    }
    return s * h;
}

// (1/(2 pi)) int_0^inf J_0(k r) (1 + k^2)^{-eta} k dk via the angular average
// of a truncated 2D Fourier integral; slow but independent of Bessel K.
double potential_fourier(double eta, double r) {
    const int nk = 40000;
    const double kmax = 400.0, dk = kmax / nk;
    double s = 0.0;
    for (int i = 1; i <= nk; ++i) {
        double k = (i - 0.5) * dk;
        s += std::cyl_bessel_j(0.0, k * r) * std::pow(1 + k * k, -eta) * k;
    }
    return s * dk / (2 * pi);
}

}  // namespace

TEST_CASE("bessel_k against quadrature and closed forms") {
    CHECK(std::abs(bessel_k(0, 1) - k_quadrature(0, 1)) < 1e-9);
    CHECK(bessel_k(0, 1) == doctest::Approx(0.421024438240708).epsilon(1e-12));
    for (double x : {0.5, 1.0, 2.0}) {
        double exact = std::sqrt(pi / (2 * x)) * std::exp(-x);
        CHECK(std::abs(bessel_k(0.5, x) / exact - 1) < 1e-10);
    }
    for (double nu : {0.0, 0.5, 1.0, 1.5})
        for (double x : {0.05, 0.3, 1.0, 4.0, 7.9, 8.1, 12.0, 30.0}) {
            double q = k_quadrature(nu, x);
            CHECK(std::abs(bessel_k(nu, x) / q - 1) < 1e-10);
        }
    // decay on a grid
    for (double nu : {0.0, 1.0}) {
        double prev = bessel_k(nu, 0.1);
        for (double x = 0.2; x < 40; x += 0.1) {
            double cur = bessel_k(nu, x);
            CHECK(cur > 0);
            CHECK(cur < prev);
            prev = cur;
        }
    }
    CHECK_THROWS(bessel_k(0, 0));
    CHECK_THROWS(bessel_k(0, -1));
}

TEST_CASE("bessel_potential") {
    CHECK(std::abs(bessel_potential(1.5, 0) - 1 / (2 * pi)) < 1e-10);
    CHECK_THROWS(bessel_potential(1.0, 0));
    CHECK_THROWS(bessel_potential(0.5, 0));
    CHECK_THROWS(bessel_potential(0, 1));
    // eta = 0.5: K ~ c / r near 0
    double r1 = 1e-4, r2 = 1e-2;
    double slope = (std::log(bessel_potential(0.5, r2)) - std::log(bessel_potential(0.5, r1))) / std::log(r2 / r1);
    CHECK(std::abs(slope + 1) < 0.05);
    CHECK(std::abs(bessel_potential(1.5, 1.0) - potential_fourier(1.5, 1.0)) < 1e-6);
    // small r limit for eta > 1 approaches the r = 0 value
    CHECK(bessel_potential(1.5, 1e-8) == doctest::Approx(1 / (2 * pi)).epsilon(1e-6));
}

TEST_CASE("massive_green and C(M)") {
    CHECK(massive_green(0.5, 1.0) == doctest::Approx(k_quadrature(0, 1) / pi).epsilon(1e-10));
    CHECK(massive_green(0.5, 1.0) == doctest::Approx(0.134013).epsilon(1e-5));
    CHECK(c_of_m(2.0) == doctest::Approx(-kEulerGamma / pi).epsilon(1e-12));
    CHECK(std::abs(c_of_m(2 * std::exp(-2 * kEulerGamma))) < 1e-14);
    CHECK(c_of_m(0.3) - c_of_m(1.7) == doctest::Approx(std::log(1.7 / 0.3) / (2 * pi)).epsilon(1e-12));
    // remainder G + (1/pi) log r - C = O(r^2 |log r|)
    double M = 1.3;
    double prev = 1;
    for (double r : {1e-1, 1e-2, 1e-3, 1e-4}) {
        double rem = std::abs(massive_green(M, r) + std::log(r) / pi - c_of_m(M));
        CHECK(rem < 2 * M * r * r * std::abs(std::log(r)));
        CHECK(rem < prev);
        prev = rem;
    }
    double g = massive_green(M, 0.01);
    for (double r = 0.02; r < 5; r += 0.01) {
        CHECK(massive_green(M, r) < g);
        g = massive_green(M, r);
    }
    CHECK_THROWS(massive_green(M, 0));
    CHECK_THROWS(c_of_m(0));
}

TEST_CASE("hitting time tail") {
    auto h = hitting_tail_t0(1, 1);
    CHECK(std::abs(h.closed_form - (2 * normal_cdf(1.0) - 1)) < 1e-14);
    CHECK(h.closed_form == doctest::Approx(0.6826894921).epsilon(1e-10));
    for (double v : {0.3, 1.0, 2.5})
        for (double t : {0.01, 0.7, 3.0, 50.0}) {
            auto r = hitting_tail_t0(v, t);
            CHECK(std::abs(r.closed_form - r.quadrature) < 1e-12);
        }
    CHECK(hitting_tail_t0(2, 4).closed_form == doctest::Approx(h.closed_form).epsilon(1e-15));
    CHECK(hitting_tail_t0(1, 1e-6).closed_form == doctest::Approx(1.0));
    CHECK(hitting_tail_t0(1, 1e8).closed_form < 1e-3);
    CHECK(hitting_cdf(1, 1) == doctest::Approx(1 - h.closed_form).epsilon(1e-14));
}

TEST_CASE("series_p_hit") {
    CHECK(std::abs(series_p_hit(1, 1, 30) - std::erf(1 / std::sqrt(2.0))) < 1e-12);
    CHECK(series_p_hit(1.3, 2.0, 0) == doctest::Approx(2 * 1.3 / std::sqrt(2 * pi * 2.0)).epsilon(1e-15));
    for (int N = 0; N < 5; ++N) CHECK(series_p_hit(0, 1, N) == 0);
    // error bounded by the next term when v^2/(2t) <= 4
    for (double v : {0.5, 1.0, 2.0})
        for (double t : {0.5, 1.0, 2.0, 5.0}) {
            if (v * v / (2 * t) > 4) continue;
            double exact = std::erf(v / std::sqrt(2 * t));
            for (int N = 0; N < 12; ++N)
                CHECK(std::abs(series_p_hit(v, t, N) - exact) <= series_p_hit_next_term(v, t, N) * (1 + 1e-12) + 1e-15);
        }
}

TEST_CASE("exit_tail_symmetric") {
    auto e0 = exit_tail_symmetric(1, 0, 20000);
    CHECK(std::abs(e0.value - 1) < 1e-4);
    CHECK(std::abs(e0.value - 1) <= e0.truncation_bound);
    CHECK(std::abs(exit_tail_symmetric(1, 0, 50).value - 1) < 4 / (pi * 101));
    for (double b : {0.5, 1.0, 2.0})
        for (double t : {0.01, 0.1, 1.0, 4.0}) {
            auto e = exit_tail_symmetric(b, t, 200);
            CHECK(e.value <= 4 / pi * std::exp(-pi * pi * t / (8 * b * b)) + 1e-15);
            CHECK(e.value >= -1e-12);
            CHECK(e.value <= 1 + 1e-12);
        }
    double t = 8 / (pi * pi) * std::log(4 / pi * 100);
    auto e = exit_tail_symmetric(1, t, 50);
    double first = 4 / pi * std::exp(-pi * pi * t / 8);
    CHECK(first == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(std::abs(e.value - 0.01) <= 4 / (3 * pi) * std::exp(-9 * pi * pi * t / 8) + 1e-16);
}
