#include "wickbench/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "wickbench/parallel.hpp"
#include "wickbench/polyseq.hpp"
#include "wickbench/special.hpp"

namespace wb {

using std::numbers::pi;

namespace {

// Sums and sums of squares of fixed-length records.
struct VecAcc {
    long n = 0;
    std::vector<double> s, s2;
    void add(const std::vector<double>& x) {
        if (s.empty()) s.assign(x.size(), 0.0), s2.assign(x.size(), 0.0);
        for (size_t i = 0; i < x.size(); ++i) {
            s[i] += x[i];
            s2[i] += x[i] * x[i];
        }
        ++n;
    }
    void merge(const VecAcc& o) {
        if (o.n == 0) return;
        if (s.empty()) s.assign(o.s.size(), 0.0), s2.assign(o.s.size(), 0.0);
        for (size_t i = 0; i < s.size(); ++i) {
            s[i] += o.s[i];
            s2[i] += o.s2[i];
        }
        n += o.n;
    }
    double mean(size_t i) const { return s[i] / n; }
    double var(size_t i) const {
        if (n < 2) return 0.0;
        double m = mean(i);
        return std::max(0.0, (s2[i] - n * m * m) / (n - 1));
    }
    double se(size_t i) const { return n > 1 ? std::sqrt(var(i) / n) : 0.0; }
};

template <class F>
VecAcc accumulate_samples(const FpsSetup& st, long samples, F record) {
    auto parts = parallel_chunks(samples, st.chunk, st.workers, [&](long b, long e) {
        VecAcc acc;
        for (long i = b; i < e; ++i) acc.add(record(i));
        return acc;
    });
    VecAcc total;
    for (auto& p : parts) total.merge(p);
    return total;
}

template <class F>
std::vector<std::vector<double>> collect_samples(const FpsSetup& st, long samples, F record) {
    auto parts = parallel_chunks(samples, st.chunk, st.workers, [&](long b, long e) {
        std::vector<std::vector<double>> out;
        for (long i = b; i < e; ++i) out.push_back(record(i));
        return out;
    });
    std::vector<std::vector<double>> all;
    for (auto& p : parts)
        for (auto& r : p) all.push_back(std::move(r));
    return all;
}

Rational to_rational(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return parse_rational(buf);
}

void check_setup(const FpsSetup& st) {
    if (!st.G) throw std::invalid_argument("FpsSetup: no Green table");
    if (!(st.delta > 0)) throw std::invalid_argument("FpsSetup: delta must be positive");
    if (!(st.a < st.v)) throw std::invalid_argument("FpsSetup: level must lie below the boundary value");
    if (st.chunk < 1) throw std::invalid_argument("FpsSetup: chunk must be positive");
}

double leb(const GridDomain& dom) { return dom.area(); }

}  // namespace

FpsDraw draw_fps(const FpsSetup& st, long index, bool full_v) {
    FpsDraw d;
    d.field = sample_gff(*st.G, st.delta * st.v, st.seed, index);
    auto u = edge_uniforms(st.dom(), st.seed, index);
    d.fps = extract_fps(d.field, st.dom(), st.delta * st.a, u);
    if (full_v) compute_v(d.fps, *st.G, st.mode);
    return d;
}

std::vector<double> fps_measure_density(const FpsSetup& st, const FpsDraw& d) {
    std::vector<double> out(st.dom().n(), 0.0);
    for (int z = 0; z < st.dom().n(); ++z)
        if (d.fps.in_a[z]) out[z] = (d.field.values[z] - d.fps.level) / st.delta;
    return out;
}

double eps_of(double s) { return std::exp(-2 * pi * s); }
double loge_over_2pi(double eps) { return std::abs(std::log(eps)) / (2 * pi); }

double mask_area(const GridDomain& dom, const std::vector<char>& m) {
    long c = 0;
    for (char x : m) c += x != 0;
    return c * dom.h() * dom.h();
}

std::vector<ExpectationRow> expectation_check(const FpsSetup& st, const std::vector<double>& s_grid, long samples,
                                              int n_trunc) {
    check_setup(st);
    if (n_trunc < 0 || n_trunc > 4) throw std::invalid_argument("expectation_check: N_trunc must lie in [0, 4]");
    const int z0 = st.dom().center();
    const size_t m = s_grid.size();
    auto acc = accumulate_samples(st, samples, [&](long i) {
        auto d = draw_fps(st, i, false);
        double V = v_at_vertex(d.fps, *st.G, z0, st.mode);
        std::vector<double> r(2 * m, 0.0);
        for (size_t k = 0; k < m; ++k) {
            bool inA = std::isnan(V);
            bool in_mask = !inA && V > st.units() * s_grid[k];
            r[k] = in_mask || inA;
            r[m + k] = in_mask;
        }
        return r;
    });
    std::vector<ExpectationRow> out;
    const double v = st.v - st.a;
    for (size_t k = 0; k < m; ++k) {
        double s = s_grid[k];
        out.push_back({s, acc.mean(k), acc.se(k), acc.mean(m + k), std::erf(v / std::sqrt(2 * s)),
                       series_p_hit(v, s, n_trunc), series_p_hit_next_term(v, s, n_trunc)});
    }
    return out;
}

MinkowskiReport minkowski_leading(const FpsSetup& st, const std::vector<double>& s_grid, long samples) {
    check_setup(st);
    const auto& dom = st.dom();
    const size_t m = s_grid.size();
    auto acc = accumulate_samples(st, samples, [&](long i) {
        auto d = draw_fps(st, i, true);
        std::vector<double> r(2 * m + 1);
        for (size_t k = 0; k < m; ++k) {
            auto nb = neighborhood_at(d.fps, st.units() * s_grid[k]);
            double g = 0.5 * std::sqrt(2 * pi * s_grid[k]);
            r[k] = g * nb.area(dom, true);
            r[m + k] = g * nb.area(dom, false);
        }
        r[2 * m] = d.fps.mass(d.field, dom) / st.delta;
        return r;
    });
    MinkowskiReport rep;
    const double v = st.v - st.a;
    for (size_t k = 0; k < m; ++k) {
        double s = s_grid[k];
        rep.rows.push_back({s, acc.mean(k), acc.se(k), acc.mean(m + k), acc.se(m + k),
                            0.5 * std::sqrt(2 * pi * s) * std::erf(v / std::sqrt(2 * s)) * leb(dom)});
    }
    for (size_t k = 0; k + 1 < m; ++k) rep.ratios.push_back(rep.rows[k + 1].mink / rep.rows[k].mink);
    rep.mass = acc.mean(2 * m);
    rep.mass_se = acc.se(2 * m);
    return rep;
}

double psi_prefactor(int n, double s) {
    double f = (n % 2 ? -1.0 : 1.0) * std::pow(2.0, n) * std::tgamma(n + 1.0) * (n + 0.5) / std::pow(2 * pi, n);
    return f * std::pow(2 * pi * s, n + 0.5);
}

namespace {

std::vector<double> psi_coeffs(const std::vector<double>& alphas, int n) {
    if (static_cast<int>(alphas.size()) != n + 1)
        throw std::invalid_argument("multiscale_psi: need n + 1 scales");
    std::vector<Rational> al;
    for (double x : alphas) al.push_back(to_rational(x));
    return vandermonde_coeffs(al, n).as_double();
}

// Per-vertex multi-scale estimate for one sample (V in lattice units).
std::vector<double> psi_sample(const FpsSetup& st, const FirstPassageSet& f, double base_s,
                               const std::vector<double>& alphas, const std::vector<double>& c, int n) {
    const double pre = psi_prefactor(n, base_s);
    std::vector<double> out(f.in_a.size(), 0.0);
    for (size_t i = 0; i < alphas.size(); ++i) {
        const double thr = st.units() * alphas[i] * base_s;
        for (size_t z = 0; z < out.size(); ++z)
            if (f.in_a[z] || f.v_values[z] > thr) out[z] += pre * c[i];
    }
    return out;
}

double integrate(const GridDomain& dom, const std::vector<double>& f) {
    double s = 0.0;
    for (double x : f) s += x;
    return s * dom.h() * dom.h();
}

}  // namespace

PsiEstimate multiscale_psi(const FpsSetup& st, double base_s, const std::vector<double>& alphas, int n, long samples) {
    check_setup(st);
    if (n < 0 || n > 2) throw std::invalid_argument("multiscale_psi: n must lie in [0, 2]");
    auto c = psi_coeffs(alphas, n);
    const auto& dom = st.dom();
    auto acc = accumulate_samples(st, samples, [&](long i) {
        auto d = draw_fps(st, i, true);
        auto f = psi_sample(st, d.fps, base_s, alphas, c, n);
        f.push_back(integrate(dom, f));
        return f;
    });
    PsiEstimate p;
    p.order = 2 * n + 1;
    p.base_s = base_s;
    p.alphas = alphas;
    p.coeffs = c;
    const int nv = dom.n();
    p.field.resize(nv);
    p.var.resize(nv);
    for (int z = 0; z < nv; ++z) {
        p.field[z] = acc.mean(z);
        p.var[z] = acc.var(z);
    }
    p.total = acc.mean(nv);
    p.total_se = acc.se(nv);
    return p;
}

GmcReport gmc_cross_validate(const FpsSetup& st, const std::vector<double>& gammas, int n, double psi_base_s,
                             const std::vector<double>& alphas, long samples) {
    check_setup(st);
    if (n != 1 && n != 3) throw std::invalid_argument("gmc_cross_validate: n must be 1 or 3");
    const int k = (n - 1) / 2;
    auto c = psi_coeffs(alphas, k);
    const auto& dom = st.dom();
    const size_t m = gammas.size();
    auto acc = accumulate_samples(st, samples, [&](long i) {
        auto d = draw_fps(st, i, true);
        double psi = integrate(dom, psi_sample(st, d.fps, psi_base_s, alphas, c, k));
        std::vector<double> vc(d.fps.v_values.size());
        for (size_t z = 0; z < vc.size(); ++z) vc[z] = d.fps.v_values[z] / st.units();
        std::vector<double> r(2 * m + 1);
        for (size_t j = 0; j < m; ++j) {
            double g = integrate(dom, gmc_germ_field(vc, gammas[j], n));
            r[j] = g;
            r[m + j] = g - psi;
        }
        r[2 * m] = psi;
        return r;
    });
    GmcReport rep;
    rep.n = n;
    rep.psi_mass = acc.mean(2 * m);
    rep.psi_se = acc.se(2 * m);
    for (size_t j = 0; j < m; ++j) rep.rows.push_back({gammas[j], acc.mean(j), acc.se(j), acc.mean(m + j), acc.se(m + j)});
    rep.shrinking = true;
    for (size_t j = 0; j + 1 < m; ++j)
        if (std::abs(rep.rows[j + 1].gap) >= std::abs(rep.rows[j].gap)) rep.shrinking = false;
    return rep;
}

EvenGermReport gmc_even_pointwise(const FpsSetup& st, double gamma, const std::vector<int>& vertices, long samples) {
    check_setup(st);
    auto rec = collect_samples(st, samples, [&](long i) {
        auto d = draw_fps(st, i, false);
        std::vector<double> r;
        for (int z : vertices) {
            double V = v_at_vertex(d.fps, *st.G, z, st.mode);
            if (std::isnan(V) || V <= 0) {
                r.push_back(std::nan(""));
                continue;
            }
            double vc = V / st.units();
            double germ = gmc_germ_field({vc}, gamma, 2)[0];
            r.push_back(std::abs(germ / (-vc) - 1));
        }
        return r;
    });
    EvenGermReport rep;
    rep.vertices = vertices;
    for (size_t j = 0; j < vertices.size(); ++j) {
        std::vector<double> x;
        for (auto& r : rec)
            if (!std::isnan(r[j])) x.push_back(r[j]);
        rep.n_defined.push_back(static_cast<long>(x.size()));
        if (x.empty()) {
            rep.median_rel_dev.push_back(std::nan(""));
            continue;
        }
        std::sort(x.begin(), x.end());
        size_t h = x.size() / 2;
        rep.median_rel_dev.push_back(x.size() % 2 ? x[h] : 0.5 * (x[h - 1] + x[h]));
    }
    return rep;
}

std::vector<double> bump(const GridDomain& dom, double cx, double cy, double rho) {
    std::vector<double> f(dom.n(), 0.0);
    for (int z = 0; z < dom.n(); ++z) {
        double r2 = (std::pow(dom.x(z) - cx, 2) + std::pow(dom.y(z) - cy, 2)) / (rho * rho);
        if (r2 < 1) f[z] = std::exp(-1 / (1 - r2));
    }
    return f;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < n; ++i) {
        double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

SlopeFit batch_slope(const std::vector<double>& x, const std::vector<std::vector<double>>& per_sample, int batches) {
    const size_t m = x.size();
    auto mean_curve = [&](size_t b, size_t e) {
        std::vector<double> y(m, 0.0);
        for (size_t i = b; i < e; ++i)
            for (size_t k = 0; k < m; ++k) y[k] += per_sample[i][k];
        for (auto& v : y) v /= double(e - b);
        return y;
    };
    SlopeFit fit{loglog_slope(x, mean_curve(0, per_sample.size())), 0.0};
    const size_t n = per_sample.size();
    if (batches < 2 || n < size_t(batches) * 2) return fit;
    std::vector<double> sl;
    for (int b = 0; b < batches; ++b) {
        auto y = mean_curve(n * b / batches, n * (b + 1) / batches);
        bool ok = true;
        for (double v : y) ok &= v > 0;
        if (ok) sl.push_back(loglog_slope(x, y));
    }
    if (sl.size() < 2) return fit;
    double mu = 0, ss = 0;
    for (double s : sl) mu += s;
    mu /= sl.size();
    for (double s : sl) ss += (s - mu) * (s - mu);
    fit.hw = 2 * std::sqrt(ss / (sl.size() - 1) / sl.size());
    return fit;
}

SecondMomentReport second_moment_leading(const FpsSetup& st, const std::vector<double>& f1, const std::vector<double>& f2,
                                         const std::vector<double>& s_grid, long samples) {
    check_setup(st);
    const auto& dom = st.dom();
    const double h2 = dom.h() * dom.h();
    const size_t m = s_grid.size();
    auto dot = [&](const std::vector<double>& f, auto pred) {
        double s = 0;
        for (int z = 0; z < dom.n(); ++z)
            if (pred(z)) s += f[z];
        return s * h2;
    };
    auto rec = collect_samples(st, samples, [&](long i) {
        auto d = draw_fps(st, i, true);
        std::vector<double> r(m + 2);
        for (size_t k = 0; k < m; ++k) {
            const double thr = st.units() * s_grid[k];
            auto in = [&](int z) { return d.fps.in_a[z] || d.fps.v_values[z] > thr; };
            r[k] = dot(f1, in) * dot(f2, in);
        }
        // Minkowski proxy at the finest threshold, and the lattice measure
        const double sf = s_grid.back();
        const double g = 0.5 * std::sqrt(2 * pi * sf);
        auto inf = [&](int z) { return d.fps.in_a[z] || d.fps.v_values[z] > st.units() * sf; };
        r[m] = 4 * g * g * dot(f1, inf) * dot(f2, inf);
        auto nu = fps_measure_density(st, d);
        double a1 = 0, a2 = 0;
        for (int z = 0; z < dom.n(); ++z) {
            a1 += nu[z] * f1[z];
            a2 += nu[z] * f2[z];
        }
        r[m + 1] = 4 * a1 * a2 * h2 * h2;
        return r;
    });
    VecAcc acc;
    for (auto& r : rec) acc.add(r);
    SecondMomentReport rep;
    std::vector<double> L, M;
    for (size_t k = 0; k < m; ++k) {
        double le = 2 * pi * s_grid[k];
        rep.rows.push_back({s_grid[k], acc.mean(k), acc.se(k), le * acc.mean(k)});
        L.push_back(le);
        M.push_back(acc.mean(k));
    }
    rep.leading = acc.mean(m);
    rep.leading_se = acc.se(m);
    rep.leading_measure = acc.mean(m + 1);
    rep.leading_measure_se = acc.se(m + 1);
    std::vector<std::vector<double>> curves;
    for (auto& r : rec) curves.emplace_back(r.begin(), r.begin() + m);
    auto fit = batch_slope(L, curves);
    rep.slope = fit.slope;
    rep.slope_hw = fit.hw;
    return rep;
}

CollarReport collar_divergence(const FpsSetup& st, int k, const std::vector<double>& q_grid,
                               const std::vector<double>& q_ext, long samples) {
    check_setup(st);
    if (k < 0) throw std::invalid_argument("collar_divergence: k must be >= 0");
    const auto& dom = st.dom();
    const double h2 = dom.h() * dom.h();
    std::vector<double> qs = q_grid;
    qs.insert(qs.end(), q_ext.begin(), q_ext.end());
    auto rec = collect_samples(st, samples, [&](long i) {
        auto d = draw_fps(st, i, true);
        std::vector<double> r(qs.size(), 0.0);
        for (int z = 0; z < dom.n(); ++z) {
            if (d.fps.in_a[z]) continue;
            double V = d.fps.v_values[z] / st.units();
            double w = std::pow(V, k) * h2;
            for (size_t j = 0; j < qs.size(); ++j)
                if (V <= qs[j]) r[j] += w;
        }
        return r;
    });
    VecAcc acc;
    for (auto& r : rec) acc.add(r);
    CollarReport rep;
    rep.k = k;
    const size_t m = q_grid.size();
    std::vector<std::vector<double>> c1, c2;
    for (auto& r : rec) {
        c1.emplace_back(r.begin(), r.begin() + m);
        c2.emplace_back(r.begin() + m, r.end());
    }
    for (size_t j = 0; j < qs.size(); ++j) {
        if (j < m) {
            rep.q.push_back(qs[j]);
            rep.mean.push_back(acc.mean(j));
            rep.se.push_back(acc.se(j));
        } else {
            rep.q_ext.push_back(qs[j]);
            rep.mean_ext.push_back(acc.mean(j));
        }
    }
    auto f1 = batch_slope(rep.q, c1);
    rep.slope = f1.slope;
    rep.slope_hw = f1.hw;
    rep.slope_ext = rep.slope_ext_hw = std::nan("");
    if (rep.q_ext.size() >= 2) {
        auto f2 = batch_slope(rep.q_ext, c2);
        rep.slope_ext = f2.slope;
        rep.slope_ext_hw = f2.hw;
    }
    return rep;
}

ResidualReport residual_report(const FpsSetup& st, const std::vector<double>& s_grid, double eta, double psi3_base,
                               long samples) {
    check_setup(st);
    const auto& dom = st.dom();
    SobolevNorm norm(dom, eta);
    const std::vector<double> al{1.0, 2.0};
    auto c3 = psi_coeffs(al, 1);
    const size_t m = s_grid.size();
    auto rec = collect_samples(st, samples, [&](long i) {
        auto d = draw_fps(st, i, true);
        auto nu = fps_measure_density(st, d);
        auto p3 = psi_sample(st, d.fps, psi3_base, al, c3, 1);
        std::vector<double> r(2 * m);
        std::vector<double> res(dom.n());
        for (size_t k = 0; k < m; ++k) {
            const double s = s_grid[k];
            const double thr = st.units() * s;
            const double c1 = 2 / std::sqrt(2 * pi * s);
            const double c3k = -1 / (3 * std::sqrt(2 * pi) * std::pow(s, 1.5));
            for (int z = 0; z < dom.n(); ++z) {
                double ind = d.fps.in_a[z] || d.fps.v_values[z] > thr;
                res[z] = ind - c1 * nu[z];
            }
            r[k] = norm(res);
            for (int z = 0; z < dom.n(); ++z) res[z] -= c3k * p3[z];
            r[m + k] = norm(res);
        }
        return r;
    });
    VecAcc acc;
    for (auto& r : rec) acc.add(r);
    ResidualReport rep;
    rep.eta = eta;
    std::vector<std::vector<double>> c0, c1;
    for (auto& r : rec) {
        c0.emplace_back(r.begin(), r.begin() + m);
        c1.emplace_back(r.begin() + m, r.end());
    }
    // RMS norms; the SE follows from the delta method on the mean square.
    for (size_t k = 0; k < m; ++k) {
        double r0 = std::sqrt(acc.mean(k)), r1 = std::sqrt(acc.mean(m + k));
        rep.rows.push_back({s_grid[k], r0, acc.se(k) / (2 * r0), r1, acc.se(m + k) / (2 * r1)});
    }
    std::vector<double> x;
    for (double s : s_grid) x.push_back(s);
    // slopes of the RMS norm: half the slope of the mean square
    auto f0 = batch_slope(x, c0), f1 = batch_slope(x, c1);
    rep.slope0 = 0.5 * f0.slope;
    rep.slope0_hw = 0.5 * f0.hw;
    rep.slope1 = 0.5 * f1.slope;
    rep.slope1_hw = 0.5 * f1.hw;
    return rep;
}

}  // namespace wb
