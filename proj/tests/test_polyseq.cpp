#include <cmath>
#include <random>

#include "doctest.h"
#include "wickbench/polyseq.hpp"

using namespace wb;

namespace {

// Dense coefficient vectors in x, built by three-term recurrences.
std::vector<std::vector<Rational>> hermite_by_recurrence(int N) {
    std::vector<std::vector<Rational>> H(N + 1);
    H[0] = {1};
    H[1] = {0, 1};
    for (int n = 1; n < N; ++n) {
        std::vector<Rational> next(n + 2, Rational(0));
        for (int k = 0; k <= n; ++k) next[k + 1] += H[n][k];
        for (int k = 0; k < n; ++k) next[k] -= n * H[n - 1][k];
        H[n + 1] = next;
    }
    return H;
}

// (n+1) L_{n+1} = (2n - x) L_n - (n-1) L_{n-1}, order -1 generalized Laguerre.
std::vector<std::vector<Rational>> laguerre_by_recurrence(int N) {
    std::vector<std::vector<Rational>> L(N + 1);
    L[0] = {1};
    L[1] = {0, -1};
    for (int n = 1; n < N; ++n) {
        std::vector<Rational> next(n + 2, Rational(0));
        for (int k = 0; k <= n; ++k) {
            next[k] += 2 * n * L[n][k];
            next[k + 1] -= L[n][k];
        }
        for (int k = 0; k < n; ++k) next[k] -= (n - 1) * L[n - 1][k];
        for (auto& c : next) c /= (n + 1);
        L[n + 1] = next;
    }
    return L;
}

Rational at_u(const BiPoly& p, int xpow, const Rational& u) {
    Rational s = 0;
    for (auto& [e, c] : p.terms())
        if (e[0] == xpow) {
            Rational t = c;
            for (int i = 0; i < e[1]; ++i) t *= u;
            s += t;
        }
    return s;
}

PolySeq random_seq(std::mt19937& rng, int cap) {
    std::uniform_int_distribution<int> d(-5, 5), nz(1, 5), sg(0, 1);
    PolySeq P(cap);
    for (int n = 0; n <= cap; ++n) {
        for (int k = 0; k < n; ++k) P.coeff(k, n) = d(rng);
        P.coeff(n, n) = sg(rng) ? nz(rng) : -nz(rng);
    }
    return P;
}

Rational random_rational(std::mt19937& rng) {
    std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
    return Rational(num(rng), den(rng));
}

}  // namespace

TEST_CASE("hermite_q closed forms") {
    CHECK(to_string(hermite_q(4)) == "x^4 - 6*x^2*u + 3*u^2");
    CHECK(hermite_q(0) == BiPoly(Rational(1)));
    CHECK(hermite_q(1) == BiPoly::var(0));
    auto H = hermite_by_recurrence(12);
    for (int n = 0; n <= 12; ++n)
        for (int k = 0; k <= n; ++k) CHECK(at_u(hermite_q(n), k, 1) == H[n][k]);
}

TEST_CASE("laguerre_lambda closed forms") {
    CHECK(to_string(laguerre_lambda(3)) == "x^3 - 6*x^2*u + 6*x*u^2");
    CHECK(to_string(laguerre_lambda(2)) == "x^2 - 2*x*u");
    CHECK(laguerre_lambda(1) == BiPoly::var(0));
    CHECK(laguerre_lambda(0) == BiPoly(Rational(1)));
    // Lambda_n(x,1) = (-1)^n n! L_n^{(-1)}(x)
    auto L = laguerre_by_recurrence(12);
    for (int n = 0; n <= 12; ++n) {
        Rational f(factorial(n));
        if (n % 2) f = -f;
        for (int k = 0; k <= n; ++k) CHECK(at_u(laguerre_lambda(n), k, 1) == f * L[n][k]);
    }
}

TEST_CASE("BiPolyEval agrees with exact evaluation") {
    BiPolyEval q5(hermite_q(5));
    double x = 0.7, u = 1.3;
    double exact = std::pow(x, 5) - 10 * std::pow(x, 3) * u + 15 * x * u * u;
    CHECK(q5(x, u) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("umbral group axioms") {
    std::mt19937 rng(12345);
    const int cap = 10;
    PolySeq I = PolySeq::monomials(cap);
    for (int t = 0; t < 100; ++t) {
        PolySeq P = random_seq(rng, cap);
        PolySeq R = random_seq(rng, cap);
        PolySeq C = umbral_compose(P, R);
        CHECK(C.valid());
        for (int n = 0; n <= cap; ++n) CHECK(C.coeff(n, n) == P.coeff(n, n) * R.coeff(n, n));
        PolySeq Pi = umbral_inverse(P);
        CHECK(Pi.valid());
        if (t < 20) {
            CHECK(umbral_compose(P, I) == P);
            CHECK(umbral_compose(I, P) == P);
            CHECK(umbral_compose(P, Pi) == I);
            CHECK(umbral_compose(Pi, P) == I);
            PolySeq S = random_seq(rng, cap);
            CHECK(umbral_compose(umbral_compose(P, R), S) == umbral_compose(P, umbral_compose(R, S)));
        }
    }
    CHECK(umbral_inverse(I) == I);
}

TEST_CASE("composition follows the definition on a small case") {
    // P_0 = 1, P_1 = 2x + 1 ; R_0 = 1, R_1 = 3x - 2. (P.R)_1 = 3 P_1 - 2 P_0 = 6x + 1
    PolySeq P(1), R(1);
    P.coeff(0, 0) = 1;
    P.coeff(0, 1) = 1;
    P.coeff(1, 1) = 2;
    R.coeff(0, 0) = 1;
    R.coeff(0, 1) = -2;
    R.coeff(1, 1) = 3;
    PolySeq C = umbral_compose(P, R);
    CHECK(C.coeff(1, 1) == 6);
    CHECK(C.coeff(0, 1) == 1);
}

TEST_CASE("one-parameter subgroups") {
    std::mt19937 rng(777);
    CHECK(umbral_inverse(hermite_seq(1, 10)) == hermite_seq(-1, 10));
    CHECK(umbral_inverse(laguerre_seq(1, 10)) == laguerre_seq(-1, 10));
    for (int t = 0; t < 20; ++t) {
        Rational u1 = random_rational(rng), u2 = random_rational(rng);
        CHECK(umbral_compose(hermite_seq(u1, 12), hermite_seq(u2, 12)) == hermite_seq(u1 + u2, 12));
        CHECK(umbral_compose(laguerre_seq(u1, 12), laguerre_seq(u2, 12)) == laguerre_seq(u1 + u2, 12));
        CHECK(umbral_compose(hermite_seq(u1, 12), hermite_seq(-u1, 12)) == PolySeq::monomials(12));
    }
}

TEST_CASE("verify_identity passes every tag") {
    for (auto& tag : identity_tags()) {
        int n = (tag == "two_var") ? 10 : (tag.rfind("reexp", 0) == 0 ? 8 : (tag == "combi" ? 11 : 12));
        auto rep = verify_identity(tag, n);
        INFO(tag << " " << rep.first_failure.value_or(""));
        CHECK(rep.pass);
        CHECK(!rep.checked_n.empty());
    }
    CHECK_THROWS_AS(verify_identity("nope", 4), std::invalid_argument);
}

TEST_CASE("change_var at n = 2 by hand") {
    // Q2(x, u1+u2) = x^2 - u1 - u2 = Q2(x,u1) - u2
    MPoly<3> X = MPoly<3>::var(0), U1 = MPoly<3>::var(1), U2 = MPoly<3>::var(2);
    auto lhs = substitute(hermite_q(2), X, U1 + U2);
    CHECK(lhs == substitute(hermite_q(2), X, U1) - U2);
}

TEST_CASE("a corrupted family is caught") {
    Families bad;
    bad.hermite = [](int n) {
        BiPoly p = hermite_q(n);
        if (n == 5) p.add({1, 2}, Rational(1, 1000));
        return p;
    };
    for (auto tag : {"change_var", "binomial", "exp_gen", "two_var", "reexp_hermite"}) {
        auto rep = verify_identity(tag, 8, bad);
        CHECK_FALSE(rep.pass);
        CHECK(rep.first_failure.has_value());
    }
    Families badl;
    badl.laguerre = [](int n) {
        BiPoly p = laguerre_lambda(n);
        if (n == 3) p.add({2, 1}, Rational(1));
        return p;
    };
    CHECK_FALSE(verify_identity("laguerre_norm", 6, badl).pass);
    CHECK_FALSE(verify_identity("reexp_laguerre", 6, badl).pass);
}

TEST_CASE("reexpansion identities match numeric closed forms") {
    // sum_k c_k w^{2k+1} / s^{k+1/2} = sqrt(2 pi) erf(w / sqrt(2 s)); evaluate the
    // right-hand side with Q_{2k+1}(w, y) at s = x - y.
    double w = 0.4, y = 0.3, x = 3.0;
    double rhs = 0.0;
    for (int k = 0; k <= 25; ++k) {
        double c = static_cast<double>(expansion_coefficient(k).rational);
        rhs += c * BiPolyEval(hermite_q(2 * k + 1))(w, y) / std::pow(x, k + 0.5);
    }
    CHECK(rhs == doctest::Approx(std::sqrt(2 * M_PI) * std::erf(w / std::sqrt(2 * (x - y)))).epsilon(1e-12));

    // sum_n (-1)^{n-1}/n! Lambda_n(w,y)/x^n = 1 - exp(-w/(x-y))
    double lag = 0.0;
    for (int n = 1; n <= 25; ++n)
        lag += static_cast<double>(laguerre_consistent_ratio(n)) * BiPolyEval(laguerre_lambda(n))(w, y) / std::pow(x, n);
    CHECK(lag == doctest::Approx(1 - std::exp(-w / (x - y))).epsilon(1e-12));
}

TEST_CASE("combi values") {
    auto rep = verify_identity("combi", 3);
    CHECK(rep.pass);
    CHECK(rep.checked_n == std::vector<int>{1, 3});
}

TEST_CASE("consistency nullspace") {
    for (int N : {4, 6, 8}) {
        auto h = consistency_nullspace(NullspaceKind::hermite, N);
        CHECK(h.dim == 1);
        CHECK(h.matches_closed_form);
        CHECK(h.basis[0][1] == Rational(-1, 6));
        auto l = consistency_nullspace(NullspaceKind::laguerre, N);
        CHECK(l.dim == 1);
        CHECK(l.matches_closed_form);
        CHECK(l.basis[0][1] == Rational(-1, 2));
    }
    auto h2 = consistency_nullspace(NullspaceKind::hermite, 2);
    auto h8 = consistency_nullspace(NullspaceKind::hermite, 8);
    for (int i = 0; i <= 2; ++i) CHECK(h2.basis[0][i] == h8.basis[0][i]);
    CHECK(hermite_consistent_ratio(0) == 1);
    CHECK_THROWS(consistency_nullspace(NullspaceKind::laguerre, 1));
}

TEST_CASE("vandermonde coefficients") {
    // 2x2 by hand: c0 + c1/sqrt2 = 0, c0 + c1/(2 sqrt2) = 1  =>  c0 = 2, c1 = -2 sqrt2
    auto r = vandermonde_coeffs({1, 2}, 1);
    CHECK(abs(r.c[0] - 2) < Decimal("1e-40"));
    CHECK(abs(r.c[1] + 2 * sqrt(Decimal(2))) < Decimal("1e-40"));
    CHECK(r.error_bound < 1e-30);
    auto r0 = vandermonde_coeffs({1}, 0);
    CHECK(abs(r0.c[0] - 1) < Decimal("1e-45"));
    auto r2 = vandermonde_coeffs({1, 2, 4}, 2);
    for (int k = 0; k <= 2; ++k) {
        Decimal s = 0;
        for (int i = 0; i <= 2; ++i) s += r2.c[i] / pow(Decimal(1 << i), Decimal(k) + Decimal("0.5"));
        CHECK(abs(s - (k == 2 ? 1 : 0)) < Decimal("1e-25"));
    }
    CHECK_THROWS(vandermonde_coeffs({1, 3, 2}, 2));
    CHECK_THROWS(vandermonde_coeffs({2, 3}, 1));
}

TEST_CASE("expansion coefficients") {
    CHECK(expansion_coefficient(0).rational == 2);
    CHECK(expansion_coefficient(1).rational == Rational(-1, 3));
    CHECK(expansion_coefficient(3).rational == Rational(-1, 168));
    CHECK(expansion_coefficient(0).value() == doctest::Approx(2 / std::sqrt(2 * M_PI)));
    // k-th coefficient equals 2 * a_k / a_0 of the consistent sequence
    for (int k = 0; k < 8; ++k) CHECK(expansion_coefficient(k).rational == 2 * hermite_consistent_ratio(k));
}

TEST_CASE("parse_rational") {
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("-2") == -2);
    CHECK(parse_rational("0.125") == Rational(1, 8));
    CHECK(parse_rational("-0.5") == Rational(-1, 2));
    CHECK(parse_rational("10") == 10);
    CHECK(parse_rational("010") == 10);
    CHECK_THROWS(parse_rational("1/0"));
}
