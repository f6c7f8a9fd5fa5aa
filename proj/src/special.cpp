#include "wickbench/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wb {

using std::numbers::pi;

// libstdc++ evaluates K_nu with Temme's series for x <= 2 and Steed's
// continued fraction beyond, accurate to a few ulps over our range.
double bessel_k(double nu, double x) {
    if (!(x > 0)) throw std::domain_error("bessel_k: x must be positive");
    return std::cyl_bessel_k(std::abs(nu), x);
}

double bessel_potential(double eta, double r) {
    if (!(eta > 0)) throw std::domain_error("bessel_potential: eta must be positive");
    if (r < 0) throw std::domain_error("bessel_potential: r < 0");
    if (r == 0) {
        if (eta <= 1) throw std::domain_error("bessel_potential: kernel diverges at r = 0 for eta <= 1");
        return 1.0 / (4 * pi * (eta - 1));
    }
    return std::pow(2.0, 1 - eta) / (2 * pi * std::tgamma(eta)) * bessel_k(eta - 1, r) * std::pow(r, eta - 1);
}

double massive_green(double M, double r) {
    if (!(M > 0)) throw std::domain_error("massive_green: M must be positive");
    if (!(r > 0)) throw std::domain_error("massive_green: r must be positive");
    return bessel_k(0, std::sqrt(2 * M) * r) / pi;
}

double c_of_m(double M) {
    if (!(M > 0)) throw std::domain_error("c_of_m: M must be positive");
    return ((std::log(2.0) - std::log(M)) / 2 - kEulerGamma) / pi;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

HittingTail hitting_tail_t0(double v, double t) {
    if (!(v > 0) || !(t > 0)) throw std::domain_error("hitting_tail_t0: v, t must be positive");
    // int_t^inf v / (sqrt(2 pi) s^{3/2}) e^{-v^2/(2s)} ds with s = t / u^2
    //   = int_0^1 2v / sqrt(2 pi t) e^{-v^2 u^2 / (2t)} du
    auto f = [&](double u) { return 2 * v / std::sqrt(2 * pi * t) * std::exp(-v * v * u * u / (2 * t)); };
    double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-15);
    return {std::erf(v / std::sqrt(2 * t)), q};
}

double hitting_cdf(double v, double t) {
    if (t <= 0) return 0.0;
    if (v <= 0) return 1.0;
    return std::erfc(v / std::sqrt(2 * t));
}

namespace {
double series_term(double v, double t, int k) {
    // v^{2k+1} / (2^k k! (k+1/2) t^{k+1/2}), built incrementally for stability
    double term = v / std::sqrt(t);
    for (int j = 1; j <= k; ++j) term *= -v * v / (2.0 * j * t);
    return term / (k + 0.5);
}
}  // namespace

double series_p_hit(double v, double t, int N) {
    if (!(t > 0)) throw std::domain_error("series_p_hit: t must be positive");
    double s = 0.0;
    for (int k = 0; k <= N; ++k) s += series_term(v, t, k);
    return s / std::sqrt(2 * pi);
}

double series_p_hit_next_term(double v, double t, int N) {
    return std::abs(series_term(v, t, N + 1)) / std::sqrt(2 * pi);
}

ExitTail exit_tail_symmetric(double b, double t, int terms) {
    if (!(b > 0) || terms < 1 || t < 0) throw std::domain_error("exit_tail_symmetric: bad arguments");
    auto term = [&](int n) {
        double m = 2 * n + 1;
        return 4 / pi * std::exp(-m * m * pi * pi * t / (8 * b * b)) / m;
    };
    double s = 0.0;
    for (int n = 0; n < terms; ++n) s += (n % 2 ? -1 : 1) * term(n);
    return {s, term(terms)};
}

}  // namespace wb
