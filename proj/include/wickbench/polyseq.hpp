#pragma once

// Exact polynomial-sequence algebra: two-variable Hermite and Laguerre
// families, umbral composition, and coefficient-level identity checks.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace wb {

using Integer = boost::multiprecision::cpp_int;
// cpp_rational keeps itself normalized: gcd(|num|, den) = 1 and den > 0.
using Rational = boost::multiprecision::cpp_rational;
using Decimal = boost::multiprecision::cpp_dec_float_50;

Rational parse_rational(const std::string& s);
std::string to_string(const Rational& q);
Integer factorial(int n);

// Sparse polynomial in NV commuting variables with exact coefficients.
// Zero coefficients are never stored.
template <int NV>
class MPoly {
public:
    using Exp = std::array<int, NV>;

    MPoly() = default;
    explicit MPoly(const Rational& c) { add(Exp{}, c); }

    static MPoly var(int i, int power = 1) {
        Exp e{};
        e[i] = power;
        MPoly p;
        p.add(e, Rational(1));
        return p;
    }
    static MPoly monomial(const Exp& e, const Rational& c) {
        MPoly p;
        p.add(e, c);
        return p;
    }

    void add(const Exp& e, const Rational& c) {
        if (c == 0) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Rational coeff(const Exp& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    const std::map<Exp, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree(int i) const {
        int d = 0;
        for (auto& [e, c] : terms_) d = std::max(d, e[i]);
        return d;
    }

    MPoly& operator+=(const MPoly& o) {
        for (auto& [e, c] : o.terms_) add(e, c);
        return *this;
    }
    MPoly& operator-=(const MPoly& o) {
        for (auto& [e, c] : o.terms_) add(e, -c);
        return *this;
    }
    MPoly& operator*=(const Rational& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& kv : terms_) kv.second *= s;
        return *this;
    }
    friend MPoly operator+(MPoly a, const MPoly& b) { return a += b; }
    friend MPoly operator-(MPoly a, const MPoly& b) { return a -= b; }
    friend MPoly operator*(MPoly a, const Rational& s) { return a *= s; }
    friend MPoly operator*(const Rational& s, MPoly a) { return a *= s; }
    friend MPoly operator*(const MPoly& a, const MPoly& b) {
        MPoly r;
        for (auto& [ea, ca] : a.terms_)
            for (auto& [eb, cb] : b.terms_) {
                Exp e;
                for (int i = 0; i < NV; ++i) e[i] = ea[i] + eb[i];
                r.add(e, ca * cb);
            }
        return r;
    }
    friend bool operator==(const MPoly& a, const MPoly& b) { return a.terms_ == b.terms_; }

    MPoly pow(int k) const {
        MPoly r(Rational(1));
        for (int i = 0; i < k; ++i) r = r * *this;
        return r;
    }

    // Keep only monomials accepted by pred.
    template <class Pred>
    MPoly filter(Pred pred) const {
        MPoly r;
        for (auto& [e, c] : terms_)
            if (pred(e)) r.terms_.emplace(e, c);
        return r;
    }

    double eval(const std::array<double, NV>& x) const {
        double s = 0.0;
        for (auto& [e, c] : terms_) {
            double t = static_cast<double>(c);
            for (int i = 0; i < NV; ++i)
                for (int k = 0; k < e[i]; ++k) t *= x[i];
            s += t;
        }
        return s;
    }

private:
    std::map<Exp, Rational> terms_;
};

// Coefficient of x^i u^j stored under key {i, j}.
using BiPoly = MPoly<2>;

// Substitute polynomials for the two variables of a BiPoly.
template <int NV>
MPoly<NV> substitute(const BiPoly& p, const MPoly<NV>& x, const MPoly<NV>& u) {
    MPoly<NV> r;
    for (auto& [e, c] : p.terms()) r += (x.pow(e[0]) * u.pow(e[1])) * c;
    return r;
}

std::string to_string(const BiPoly& p);

BiPoly hermite_q(int n);
BiPoly laguerre_lambda(int n);

// Floating-point evaluation with precomputed double coefficients.
// Used on hot paths (per-vertex Wick powers, Laguerre renormalization).
class BiPolyEval {
public:
    BiPolyEval() = default;
    explicit BiPolyEval(const BiPoly& p);
    double operator()(double x, double u) const;

private:
    std::vector<std::array<int, 2>> exps_;
    std::vector<double> coefs_;
};

// Polynomial sequence P_0..P_N stored as an upper-triangular coefficient
// matrix: coeff(k, n) is the coefficient of x^k in P_n.
class PolySeq {
public:
    PolySeq() = default;
    explicit PolySeq(int cap);

    int cap() const { return cap_; }
    const Rational& coeff(int k, int n) const { return cols_[n][k]; }
    Rational& coeff(int k, int n) { return cols_[n][k]; }

    bool valid() const;  // triangular by construction; checks the diagonal

    static PolySeq monomials(int cap);
    // P_n(x) = family(n)(x, u) for n ≤ cap.
    static PolySeq from_family(const std::function<BiPoly(int)>& family, const Rational& u, int cap);

    friend bool operator==(const PolySeq& a, const PolySeq& b) {
        return a.cap_ == b.cap_ && a.cols_ == b.cols_;
    }

private:
    int cap_ = -1;
    std::vector<std::vector<Rational>> cols_;  // cols_[n] has n+1 entries
};

PolySeq hermite_seq(const Rational& u, int cap);
PolySeq laguerre_seq(const Rational& u, int cap);

PolySeq umbral_compose(const PolySeq& P, const PolySeq& R);
PolySeq umbral_inverse(const PolySeq& P);

// Families the identity checker draws from. Tests swap in a corrupted
// family to confirm that the checker notices.
struct Families {
    std::function<BiPoly(int)> hermite = hermite_q;
    std::function<BiPoly(int)> laguerre = laguerre_lambda;
};

struct IdentityReport {
    std::string identity;
    int n_max = 0;
    bool pass = true;
    std::vector<int> checked_n;
    std::vector<bool> pass_per_n;
    std::optional<std::string> first_failure;
};

const std::vector<std::string>& identity_tags();

// Throws std::invalid_argument on an unknown tag.
IdentityReport verify_identity(const std::string& tag, int n_max, const Families& fam = {});

struct Nullspace {
    int dim = 0;
    int first_index = 0;                       // 0 for hermite, 1 for laguerre
    std::vector<std::vector<Rational>> basis;  // each normalized so its first entry is 1
    bool matches_closed_form = false;
};

enum class NullspaceKind { hermite, laguerre };

Nullspace consistency_nullspace(NullspaceKind kind, int N, const Families& fam = {});

// Closed-form solutions: a_k/a_0 for hermite, a_n/a_1 for laguerre.
Rational hermite_consistent_ratio(int k);
Rational laguerre_consistent_ratio(int n);

struct VandermondeResult {
    std::vector<Decimal> c;
    double error_bound = 0.0;  // |c(50 digits) - c(100 digits)| maximum
    std::vector<double> as_double() const;
};

// Solves sum_i c_i alpha_i^{-(k+1/2)} = [k == n] for k = 0..n.
VandermondeResult vandermonde_coeffs(const std::vector<Rational>& alphas, int n);

// (-1)^k / (2^k k! (k + 1/2)); the full coefficient carries an extra 1/sqrt(2 pi).
struct ExpansionCoefficient {
    Rational rational;
    double value() const;  // rational / sqrt(2 pi)
};
ExpansionCoefficient expansion_coefficient(int k);

}  // namespace wb
