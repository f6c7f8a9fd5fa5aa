#include "wickbench/polyseq.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace wb {

namespace {

Rational binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    return Rational(factorial(n), factorial(k) * factorial(n - k));
}

Rational pow2(int k) { return Rational(Integer(1) << k); }

template <int NV>
std::string mono_string(const std::array<int, NV>& e, const char* const* names) {
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < NV; ++i) {
        if (e[i] == 0) continue;
        if (!first) os << '*';
        os << names[i];
        if (e[i] != 1) os << '^' << e[i];
        first = false;
    }
    return first ? std::string("1") : os.str();
}

// First monomial where two polynomials differ, formatted for a report.
template <int NV>
std::optional<std::string> first_diff(const MPoly<NV>& lhs, const MPoly<NV>& rhs,
                                      const char* const* names) {
    MPoly<NV> d = lhs - rhs;
    if (d.is_zero()) return std::nullopt;
    auto& [e, c] = *d.terms().begin();
    std::ostringstream os;
    os << "coefficient of " << mono_string<NV>(e, names) << ": lhs=" << to_string(lhs.coeff(e))
       << " rhs=" << to_string(rhs.coeff(e));
    return os.str();
}

struct Recorder {
    IdentityReport& r;
    void operator()(int n, const std::optional<std::string>& diff) {
        r.checked_n.push_back(n);
        r.pass_per_n.push_back(!diff);
        if (diff && !r.first_failure) {
            r.first_failure = "n=" + std::to_string(n) + ", " + *diff;
            r.pass = false;
        }
    }
};

using P3 = MPoly<3>;
using P4 = MPoly<4>;

void check_change_var(IdentityReport& rep, const Families& fam) {
    static const char* names[] = {"x", "u1", "u2"};
    Recorder rec{rep};
    P3 X = P3::var(0), U1 = P3::var(1), U2 = P3::var(2);
    for (int n = 0; n <= rep.n_max; ++n) {
        P3 lhs = substitute(fam.hermite(n), X, U1 + U2);
        P3 rhs;
        for (int k = 0; 2 * k <= n; ++k) {
            Rational c(factorial(n), (Integer(1) << k) * factorial(k) * factorial(n - 2 * k));
            if (k % 2) c = -c;
            rhs += substitute(fam.hermite(n - 2 * k), X, U1) * U2.pow(k) * c;
        }
        rec(n, first_diff(lhs, rhs, names));
    }
}

void check_binomial(IdentityReport& rep, const Families& fam) {
    static const char* names[] = {"x", "y", "u"};
    Recorder rec{rep};
    P3 X = P3::var(0), Y = P3::var(1), U = P3::var(2);
    for (int n = 0; n <= rep.n_max; ++n) {
        P3 lhs = substitute(fam.hermite(n), X + Y, U);
        P3 rhs;
        for (int j = 0; j <= n; ++j) rhs += substitute(fam.hermite(j), X, U) * Y.pow(n - j) * binom(n, j);
        rec(n, first_diff(lhs, rhs, names));
    }
}

void check_exp_gen(IdentityReport& rep, const Families& fam) {
    static const char* names[] = {"g", "x", "u"};
    Recorder rec{rep};
    const int N = rep.n_max;
    P3 G = P3::var(0), X = P3::var(1), U = P3::var(2);
    P3 arg = G * X - G.pow(2) * U * Rational(1, 2);
    auto trunc = [N](const std::array<int, 3>& e) { return e[0] <= N; };
    P3 series(Rational(1)), term(Rational(1));
    for (int m = 1; m <= N; ++m) {
        term = (term * arg).filter(trunc) * Rational(1, m);
        series += term;
    }
    for (int n = 0; n <= N; ++n) {
        auto deg_n = [n](const std::array<int, 3>& e) { return e[0] == n; };
        P3 lhs = substitute(fam.hermite(n), X, U) * G.pow(n) * Rational(1, factorial(n));
        rec(n, first_diff(lhs, series.filter(deg_n), names));
    }
}

void check_two_var(IdentityReport& rep, const Families& fam) {
    static const char* names[] = {"x1", "x2", "u1", "u2"};
    Recorder rec{rep};
    P4 X1 = P4::var(0), X2 = P4::var(1), U1 = P4::var(2), U2 = P4::var(3);
    for (int n = 0; n <= rep.n_max; ++n) {
        P4 lhs = substitute(fam.hermite(n), X1 + X2, U1 + U2);
        P4 rhs;
        for (int j = 0; j <= n; ++j)
            rhs += substitute(fam.hermite(n - j), X1, U1) * substitute(fam.hermite(j), X2, U2) * binom(n, j);
        rec(n, first_diff(lhs, rhs, names));
    }
}

Rational laguerre_coef(int n, int k) {
    Rational c(factorial(n) * factorial(n - 1), factorial(n - k) * factorial(k) * factorial(k - 1));
    return (n - k) % 2 ? -c : c;
}

void check_laguerre_norm(IdentityReport& rep, const Families& fam) {
    static const char* names[] = {"x", "u1", "u2"};
    Recorder rec{rep};
    P3 X = P3::var(0), U1 = P3::var(1), U2 = P3::var(2);
    for (int n = 1; n <= rep.n_max; ++n) {
        P3 lhs = substitute(fam.laguerre(n), X, U1 + U2);
        P3 rhs;
        for (int k = 1; k <= n; ++k)
            rhs += substitute(fam.laguerre(k), X, U1) * U2.pow(n - k) * laguerre_coef(n, k);
        rec(n, first_diff(lhs, rhs, names));
    }
}

// (1 - y/x)^{-(k+1/2)} = sum_j (1/j!) prod_{l<j} (k + l + 1/2) (y/x)^j
Rational half_binomial_series(int k, int j) {
    Rational p(1);
    for (int l = 0; l < j; ++l) p *= Rational(2 * (k + l) + 1, 2);
    return p / Rational(factorial(j));
}

// Series in (w, y, z) with z = 1/x; the Hermite side carries a global x^{-1/2}.
P3 hermite_reexp_lhs(int k, int N) {
    P3 r;
    for (int j = 0; k + j <= N; ++j) r.add({2 * k + 1, j, k + j}, half_binomial_series(k, j));
    return r;
}

P3 hermite_reexp_rhs(int k, const Families& fam) {
    return substitute(fam.hermite(2 * k + 1), P3::var(0), P3::var(1)) * P3::var(2, k);
}

P3 laguerre_reexp_lhs(int n, int N) {
    P3 r;
    for (int m = 0; n + m <= N; ++m) r.add({n, m, n + m}, binom(m + n - 1, m));
    return r;
}

P3 laguerre_reexp_rhs(int n, const Families& fam) {
    return substitute(fam.laguerre(n), P3::var(0), P3::var(1)) * P3::var(2, n);
}

// Both sides are compared order by order in 1/x up to n_max. This contains
// every monomial of total degree <= n_max.
void check_reexp_hermite(IdentityReport& rep, const Families& fam) {
    static const char* names[] = {"w", "y", "1/x"};
    Recorder rec{rep};
    const int N = rep.n_max;
    P3 lhs, rhs;
    for (int k = 0; k <= N; ++k) {
        Rational a = expansion_coefficient(k).rational;
        lhs += hermite_reexp_lhs(k, N) * a;
        rhs += hermite_reexp_rhs(k, fam) * a;
    }
    for (int K = 0; K <= N; ++K) {
        auto order = [K](const std::array<int, 3>& e) { return e[2] == K; };
        rec(K, first_diff(lhs.filter(order), rhs.filter(order), names));
    }
}

void check_reexp_laguerre(IdentityReport& rep, const Families& fam) {
    static const char* names[] = {"w", "y", "1/x"};
    Recorder rec{rep};
    const int N = rep.n_max;
    P3 lhs, rhs;
    for (int n = 1; n <= N; ++n) {
        Rational a = laguerre_consistent_ratio(n);
        lhs += laguerre_reexp_lhs(n, N) * a;
        rhs += laguerre_reexp_rhs(n, fam) * a;
    }
    for (int K = 1; K <= N; ++K) {
        auto order = [K](const std::array<int, 3>& e) { return e[2] == K; };
        rec(K, first_diff(lhs.filter(order), rhs.filter(order), names));
    }
}

Rational combi_sum(int n, int j) {
    const int m = n / 2;
    Rational s(0);
    for (int k = 0; k <= m; ++k) {
        Rational t(factorial(n) * factorial(2 * (n - 1 - k - j)),
                   factorial(n - 2 * k) * factorial(k) * factorial(n - 1 - k - j) * factorial(j));
        s += (j + k) % 2 ? -t : t;
    }
    return s / pow2(n - 1);
}

void check_combi(IdentityReport& rep) {
    Recorder rec{rep};
    for (int n = 1; n <= rep.n_max; n += 2) {
        const int m = n / 2;
        std::optional<std::string> diff;
        for (int j = 0; j <= m && !diff; ++j) {
            Rational expect = (j == m) ? 1 : 0;
            Rational got = combi_sum(n, j);
            if (got != expect) diff = "j=" + std::to_string(j) + ": sum=" + to_string(got) + " expected " + to_string(expect);
        }
        rec(n, diff);
    }
}

// Exact nullspace by reduced row echelon form.
std::vector<std::vector<Rational>> nullspace(std::vector<std::vector<Rational>> A, int ncols) {
    std::vector<int> pivot_col;
    int row = 0;
    for (int col = 0; col < ncols && row < static_cast<int>(A.size()); ++col) {
        int p = -1;
        for (int r = row; r < static_cast<int>(A.size()); ++r)
            if (A[r][col] != 0) {
                p = r;
                break;
            }
        if (p < 0) continue;
        std::swap(A[row], A[p]);
        Rational inv = 1 / A[row][col];
        for (auto& v : A[row]) v *= inv;
        for (int r = 0; r < static_cast<int>(A.size()); ++r) {
            if (r == row || A[r][col] == 0) continue;
            Rational f = A[r][col];
            for (int c = 0; c < ncols; ++c) A[r][c] -= f * A[row][c];
        }
        pivot_col.push_back(col);
        ++row;
    }
    std::vector<std::vector<Rational>> basis;
    for (int free = 0; free < ncols; ++free) {
        if (std::find(pivot_col.begin(), pivot_col.end(), free) != pivot_col.end()) continue;
        std::vector<Rational> v(ncols, Rational(0));
        v[free] = 1;
        for (size_t r = 0; r < pivot_col.size(); ++r) v[pivot_col[r]] = -A[r][free];
        basis.push_back(std::move(v));
    }
    return basis;
}

template <class T>
std::vector<T> solve_dense(std::vector<std::vector<T>> M, std::vector<T> b) {
    const size_t n = b.size();
    for (size_t c = 0; c < n; ++c) {
        size_t p = c;
        for (size_t r = c + 1; r < n; ++r)
            if (abs(M[r][c]) > abs(M[p][c])) p = r;
        std::swap(M[c], M[p]);
        std::swap(b[c], b[p]);
        for (size_t r = c + 1; r < n; ++r) {
            T f = M[r][c] / M[c][c];
            for (size_t k = c; k < n; ++k) M[r][k] -= f * M[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<T> x(n);
    for (size_t i = n; i-- > 0;) {
        T s = b[i];
        for (size_t k = i + 1; k < n; ++k) s -= M[i][k] * x[k];
        x[i] = s / M[i][i];
    }
    return x;
}

template <class T>
std::vector<T> vandermonde_solve(const std::vector<Rational>& alphas, int n) {
    std::vector<std::vector<T>> M(n + 1, std::vector<T>(n + 1));
    std::vector<T> b(n + 1, T(0));
    b[n] = 1;
    for (int i = 0; i <= n; ++i) {
        T a = T(numerator(alphas[i]).str()) / T(denominator(alphas[i]).str());
        T p = 1 / sqrt(a);
        for (int k = 0; k <= n; ++k) {
            M[k][i] = p;
            p /= a;
        }
    }
    return solve_dense(M, b);
}

}  // namespace

Integer factorial(int n) {
    Integer r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

namespace {

// cpp_int reads a leading 0 as octal, so parse sign and digits by hand.
Integer parse_integer(std::string s) {
    bool neg = !s.empty() && s[0] == '-';
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) s.erase(0, 1);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("not a number: " + s);
    s.erase(0, std::min(s.find_first_not_of('0'), s.size() - 1));
    Integer v(s);
    return neg ? Integer(-v) : v;
}

}  // namespace

Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Integer den = parse_integer(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator: " + s);
        return Rational(parse_integer(s.substr(0, slash)), den);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(parse_integer(s));
    std::string frac = s.substr(dot + 1);
    Integer den = 1;
    for (size_t i = 0; i < frac.size(); ++i) den *= 10;
    return Rational(parse_integer(s.substr(0, dot) + frac), den);
}

std::string to_string(const Rational& q) {
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

std::string to_string(const BiPoly& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
        auto& [e, c] = *it;
        Rational a = abs(c);
        os << (c < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        bool unit = (a == 1) && (e[0] || e[1]);
        if (!unit) os << to_string(a);
        static const char* names[] = {"x", "u"};
        if (e[0] || e[1]) os << (unit ? "" : "*") << mono_string<2>(e, names);
        first = false;
    }
    return os.str();
}

BiPoly hermite_q(int n) {
    if (n < 0) throw std::invalid_argument("hermite_q: n < 0");
    BiPoly p;
    for (int k = 0; 2 * k <= n; ++k) {
        Rational c(factorial(n), (Integer(1) << k) * factorial(k) * factorial(n - 2 * k));
        p.add({n - 2 * k, k}, k % 2 ? -c : c);
    }
    return p;
}

BiPoly laguerre_lambda(int n) {
    if (n < 0) throw std::invalid_argument("laguerre_lambda: n < 0");
    if (n == 0) return BiPoly(Rational(1));
    BiPoly p;
    for (int k = 1; k <= n; ++k) p.add({k, n - k}, laguerre_coef(n, k));
    return p;
}

BiPolyEval::BiPolyEval(const BiPoly& p) {
    for (auto& [e, c] : p.terms()) {
        exps_.push_back(e);
        coefs_.push_back(static_cast<double>(c));
    }
}

double BiPolyEval::operator()(double x, double u) const {
    double s = 0.0;
    for (size_t i = 0; i < coefs_.size(); ++i) {
        double t = coefs_[i];
        for (int k = 0; k < exps_[i][0]; ++k) t *= x;
        for (int k = 0; k < exps_[i][1]; ++k) t *= u;
        s += t;
    }
    return s;
}

PolySeq::PolySeq(int cap) : cap_(cap), cols_(cap + 1) {
    for (int n = 0; n <= cap; ++n) cols_[n].assign(n + 1, Rational(0));
}

bool PolySeq::valid() const {
    for (int n = 0; n <= cap_; ++n)
        if (cols_[n][n] == 0) return false;
    return true;
}

PolySeq PolySeq::monomials(int cap) {
    PolySeq P(cap);
    for (int n = 0; n <= cap; ++n) P.coeff(n, n) = 1;
    return P;
}

PolySeq PolySeq::from_family(const std::function<BiPoly(int)>& family, const Rational& u, int cap) {
    PolySeq P(cap);
    for (int n = 0; n <= cap; ++n) {
        const BiPoly p = family(n);
        for (auto& [e, c] : p.terms()) {
            Rational up = 1;
            for (int i = 0; i < e[1]; ++i) up *= u;
            P.coeff(e[0], n) += c * up;
        }
    }
    return P;
}

PolySeq hermite_seq(const Rational& u, int cap) { return PolySeq::from_family(hermite_q, u, cap); }
PolySeq laguerre_seq(const Rational& u, int cap) { return PolySeq::from_family(laguerre_lambda, u, cap); }

PolySeq umbral_compose(const PolySeq& P, const PolySeq& R) {
    if (P.cap() != R.cap()) throw std::invalid_argument("umbral_compose: degree caps differ");
    PolySeq C(P.cap());
    for (int n = 0; n <= P.cap(); ++n)
        for (int k = 0; k <= n; ++k) {
            const Rational& r = R.coeff(k, n);
            if (r == 0) continue;
            for (int i = 0; i <= k; ++i) C.coeff(i, n) += r * P.coeff(i, k);
        }
    return C;
}

PolySeq umbral_inverse(const PolySeq& P) {
    if (!P.valid()) throw std::invalid_argument("umbral_inverse: zero on the diagonal");
    // Solve P * X = I column by column, bottom-up.
    const int N = P.cap();
    PolySeq X(N);
    for (int n = 0; n <= N; ++n)
        for (int i = n; i >= 0; --i) {
            Rational s = (i == n) ? 1 : 0;
            for (int k = i + 1; k <= n; ++k) s -= P.coeff(i, k) * X.coeff(k, n);
            X.coeff(i, n) = s / P.coeff(i, i);
        }
    return X;
}

const std::vector<std::string>& identity_tags() {
    static const std::vector<std::string> tags = {"change_var", "binomial",       "exp_gen",        "two_var",
                                                  "laguerre_norm", "reexp_hermite", "reexp_laguerre", "combi"};
    return tags;
}

IdentityReport verify_identity(const std::string& tag, int n_max, const Families& fam) {
    if (n_max < 1) throw std::invalid_argument("verify_identity: n_max < 1");
    IdentityReport rep;
    rep.identity = tag;
    rep.n_max = n_max;
    if (tag == "change_var") check_change_var(rep, fam);
    else if (tag == "binomial") check_binomial(rep, fam);
    else if (tag == "exp_gen") check_exp_gen(rep, fam);
    else if (tag == "two_var") check_two_var(rep, fam);
    else if (tag == "laguerre_norm") check_laguerre_norm(rep, fam);
    else if (tag == "reexp_hermite") check_reexp_hermite(rep, fam);
    else if (tag == "reexp_laguerre") check_reexp_laguerre(rep, fam);
    else if (tag == "combi") check_combi(rep);
    else throw std::invalid_argument("unknown identity tag: " + tag);
    return rep;
}

Rational hermite_consistent_ratio(int k) {
    Rational r = Rational(1) / (pow2(k + 1) * Rational(factorial(k)) * Rational(2 * k + 1, 2));
    return k % 2 ? -r : r;
}

Rational laguerre_consistent_ratio(int n) {
    Rational r(1, factorial(n));
    return (n - 1) % 2 ? -r : r;
}

Nullspace consistency_nullspace(NullspaceKind kind, int N, const Families& fam) {
    if (N < 2) throw std::invalid_argument("consistency_nullspace: N < 2");
    const bool herm = kind == NullspaceKind::hermite;
    const int first = herm ? 0 : 1;
    const int nunk = N + 1 - first;
    // Column i holds the series (lhs - rhs) multiplying the unknown a_{first+i}.
    std::vector<P3> cols;
    for (int i = first; i <= N; ++i)
        cols.push_back(herm ? hermite_reexp_lhs(i, N) - hermite_reexp_rhs(i, fam)
                            : laguerre_reexp_lhs(i, N) - laguerre_reexp_rhs(i, fam));
    std::map<std::array<int, 3>, std::vector<Rational>> rows;
    for (int i = 0; i < nunk; ++i)
        for (auto& [e, c] : cols[i].terms()) {
            if (e[2] > N) continue;
            auto& row = rows[e];
            if (row.empty()) row.assign(nunk, Rational(0));
            row[i] = c;
        }
    std::vector<std::vector<Rational>> A;
    for (auto& kv : rows) A.push_back(kv.second);

    Nullspace ns;
    ns.first_index = first;
    ns.basis = nullspace(std::move(A), nunk);
    ns.dim = static_cast<int>(ns.basis.size());
    for (auto& v : ns.basis) {
        Rational lead = v[0];
        if (lead != 0)
            for (auto& x : v) x /= lead;
    }
    ns.matches_closed_form = ns.dim == 1;
    if (ns.dim == 1)
        for (int i = 0; i < nunk; ++i) {
            Rational expect = herm ? hermite_consistent_ratio(i) / hermite_consistent_ratio(0)
                                   : laguerre_consistent_ratio(i + 1);
            if (ns.basis[0][i] != expect) ns.matches_closed_form = false;
        }
    return ns;
}

std::vector<double> VandermondeResult::as_double() const {
    std::vector<double> r;
    for (auto& x : c) r.push_back(static_cast<double>(x));
    return r;
}

VandermondeResult vandermonde_coeffs(const std::vector<Rational>& alphas, int n) {
    using Dec100 = boost::multiprecision::cpp_dec_float_100;
    if (static_cast<int>(alphas.size()) < n + 1) throw std::invalid_argument("vandermonde_coeffs: need n+1 alphas");
    if (alphas[0] != 1) throw std::invalid_argument("vandermonde_coeffs: alpha_0 must be 1");
    for (int i = 1; i <= n; ++i)
        if (!(alphas[i] > alphas[i - 1])) throw std::invalid_argument("vandermonde_coeffs: alphas not increasing");
    std::vector<Rational> a(alphas.begin(), alphas.begin() + n + 1);
    auto lo = vandermonde_solve<Decimal>(a, n);
    auto hi = vandermonde_solve<Dec100>(a, n);
    VandermondeResult res;
    res.c = lo;
    Dec100 err = 0;
    for (int i = 0; i <= n; ++i) err = std::max(err, Dec100(abs(Dec100(lo[i]) - hi[i])));
    res.error_bound = static_cast<double>(err);
    return res;
}

double ExpansionCoefficient::value() const {
    return static_cast<double>(rational) / std::sqrt(2.0 * std::numbers::pi);
}

ExpansionCoefficient expansion_coefficient(int k) {
    if (k < 0) throw std::invalid_argument("expansion_coefficient: k < 0");
    Rational r = Rational(1) / (pow2(k) * Rational(factorial(k)) * Rational(2 * k + 1, 2));
    return {k % 2 ? Rational(-r) : r};
}

}  // namespace wb
