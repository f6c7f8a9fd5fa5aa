#pragma once

// Scalar special functions and one-dimensional Brownian hitting laws.

namespace wb {

inline constexpr double kEulerGamma = 0.5772156649015329;

// Modified Bessel function of the second kind K_nu(x), x > 0.
double bessel_k(double nu, double x);

// Kernel of the H^{-eta} norm in the plane:
//   K_eta(r) = 2^{1-eta} / (2 pi Gamma(eta)) * K_{eta-1}(r) / r^{1-eta},
// and 1/(4 pi (eta - 1)) at r = 0 when eta > 1.
double bessel_potential(double eta, double r);

// Green function of (1/2) Delta - M in the plane: (1/pi) K_0(sqrt(2M) r).
double massive_green(double M, double r);

// Constant in G_M(0,r) = -(1/pi) log r + C(M) + o(1).
double c_of_m(double M);

double normal_cdf(double x);

struct HittingTail {
    double closed_form;  // erf(v / sqrt(2t))
    double quadrature;   // tail integral of the density of T_0
};

// P_v(T_0 > t) for a standard Brownian motion started at v > 0.
HittingTail hitting_tail_t0(double v, double t);

// Distribution function of the hitting time of 0 from v: P(T_0 <= t).
double hitting_cdf(double v, double t);

// (1/sqrt(2 pi)) sum_{k=0}^{N} (-1)^k v^{2k+1} / (2^k k! (k + 1/2) t^{k+1/2})
double series_p_hit(double v, double t, int N);

// Magnitude of the first omitted term of series_p_hit(v, t, N).
double series_p_hit_next_term(double v, double t, int N);

struct ExitTail {
    double value;
    double truncation_bound;  // alternating series: |error| <= first omitted term
};

// P_0(T_{-b,b} > t) via the Fourier series with `terms` terms.
ExitTail exit_tail_symmetric(double b, double t, int terms);

}  // namespace wb
