#include "wickbench/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "wickbench/expansion.hpp"
#include "wickbench/gff.hpp"
#include "wickbench/lattice.hpp"
#include "wickbench/parallel.hpp"
#include "wickbench/sausage.hpp"
#include "wickbench/sets.hpp"
#include "wickbench/special.hpp"

namespace wb {

using std::numbers::pi;

namespace {

CriterionResult crit(const std::string& tag, ojson value, ojson bound, bool pass) {
    return {tag, std::move(value), std::move(bound), pass};
}

ojson range(double lo, double hi) { return ojson::array({lo, hi}); }

// ---------------------------------------------------------------- identities

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt by the trapezoid rule,
// which converges geometrically for this integrand.
double bessel_k_trapezoid(double nu, double x) {
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

PolySeq random_seq(std::mt19937_64& rng, int cap) {
    boost::random::uniform_int_distribution<int> num(-9, 9), den(1, 5);
    PolySeq p(cap);
    for (int n = 0; n <= cap; ++n)
        for (int k = 0; k <= n; ++k) {
            int a = num(rng);
            if (k == n && a == 0) a = 1;
            p.coeff(k, n) = Rational(a, den(rng));
        }
    return p;
}

void identity_suite(const Config* cfg, const Families& fam, ExperimentResult& res) {
    auto get = [&](const char* key, long def) { return cfg ? cfg->integer(key) : def; };
    const long n_max = get("n_max", 12), two_var = get("two_var_n", 10), reexp = get("reexp_degree", 8),
               combi = get("combi_n", 11), gcap = get("group_cap", 10), scap = get("subgroup_cap", 12);
    std::vector<long> null_n = cfg ? cfg->ints("nullspace_n") : std::vector<long>{4, 6, 8};

    Table t{"identities", {"identity_id", "n", "pass"}, {}};
    const auto& tags = identity_tags();
    for (size_t id = 0; id < tags.size(); ++id) {
        const auto& tag = tags[id];
        long n = n_max;
        if (tag == "two_var") n = two_var;
        if (tag == "reexp_hermite" || tag == "reexp_laguerre") n = reexp;
        if (tag == "combi") n = combi;
        auto rep = verify_identity(tag, static_cast<int>(n), fam);
        long failed = 0;
        for (size_t j = 0; j < rep.checked_n.size(); ++j) {
            t.rows.push_back({double(id), double(rep.checked_n[j]), rep.pass_per_n[j] ? 1.0 : 0.0});
            failed += !rep.pass_per_n[j];
        }
        res.criteria.push_back(crit("identity." + tag, failed, 0, rep.pass));
    }
    res.tables.push_back(std::move(t));

    // group axioms on random triangular sequences
    std::mt19937_64 rng(cfg ? cfg->seed() : 1);
    const int cap = static_cast<int>(gcap);
    PolySeq I = PolySeq::monomials(cap);
    long bad = 0;
    for (int trial = 0; trial < 10; ++trial) {
        PolySeq P = random_seq(rng, cap), R = random_seq(rng, cap), S = random_seq(rng, cap);
        PolySeq Pi = umbral_inverse(P);
        bad += !(umbral_compose(P, I) == P) + !(umbral_compose(I, P) == P);
        bad += !(umbral_compose(P, Pi) == I) + !(umbral_compose(Pi, P) == I);
        bad += !(umbral_compose(umbral_compose(P, R), S) == umbral_compose(P, umbral_compose(R, S)));
    }
    res.criteria.push_back(crit("umbral.group_axioms", bad, 0, bad == 0));

    const int sc = static_cast<int>(scap);
    const std::vector<Rational> us{Rational(1, 2), Rational(-3, 4), Rational(2), Rational(5, 3)};
    auto hseq = [&](const Rational& u) { return PolySeq::from_family(fam.hermite, u, sc); };
    auto lseq = [&](const Rational& u) { return PolySeq::from_family(fam.laguerre, u, sc); };
    long hb = 0, lb = 0;
    for (auto& u1 : us)
        for (auto& u2 : us) {
            hb += !(umbral_compose(hseq(u1), hseq(u2)) == hseq(u1 + u2));
            lb += !(umbral_compose(lseq(u1), lseq(u2)) == lseq(u1 + u2));
        }
    res.criteria.push_back(crit("umbral.hermite_subgroup", hb, 0, hb == 0));
    res.criteria.push_back(crit("umbral.laguerre_subgroup", lb, 0, lb == 0));

    for (auto [kind, name] : {std::pair{NullspaceKind::hermite, "hermite"}, std::pair{NullspaceKind::laguerre, "laguerre"}}) {
        ojson dims = ojson::array();
        bool ok = true;
        for (long N : null_n) {
            auto ns = consistency_nullspace(kind, static_cast<int>(N), fam);
            dims.push_back(ns.dim);
            ok = ok && ns.dim == 1 && ns.matches_closed_form;
        }
        res.criteria.push_back(crit(std::string("nullspace.") + name, dims, 1, ok));
    }
}

void special_suite(const Config* cfg, ExperimentResult& res) {
    std::vector<double> vs = cfg ? cfg->nums("series_v") : std::vector<double>{0.5, 1, 2};
    std::vector<double> ts = cfg ? cfg->nums("series_t") : std::vector<double>{0.5, 1, 2, 5};
    const int terms = cfg ? static_cast<int>(cfg->integer("series_terms")) : 30;
    const double stol = cfg ? cfg->num("criteria.series_tol") : 1e-12;
    Table t{"series_p_hit", {"v", "t", "series", "closed_form", "abs_error"}, {}};
    double worst = 0;
    for (double v : vs)
        for (double s : ts) {
            double a = series_p_hit(v, s, terms), b = std::erf(v / std::sqrt(2 * s));
            t.rows.push_back({v, s, a, b, std::abs(a - b)});
            worst = std::max(worst, std::abs(a - b));
        }
    res.tables.push_back(std::move(t));
    res.criteria.push_back(crit("series.p_hit", worst, stol, worst <= stol));

    const double btol = cfg ? cfg->num("criteria.bessel_tol") : 1e-9;
    const double ztol = cfg ? cfg->num("criteria.potential_zero_tol") : 1e-10;
    const double sltol = cfg ? cfg->num("criteria.slope_tol") : 0.05;
    double k0 = std::abs(bessel_k(0, 1) - bessel_k_trapezoid(0, 1));
    res.criteria.push_back(crit("bessel.k0_at_1", k0, btol, k0 <= btol));
    double z = std::abs(bessel_potential(1.5, 0) - 1 / (2 * pi));
    res.criteria.push_back(crit("bessel.potential_at_0", z, ztol, z <= ztol));
    double r1 = 1e-4, r2 = 1e-2;
    double slope = (std::log(bessel_potential(0.5, r2)) - std::log(bessel_potential(0.5, r1))) / std::log(r2 / r1);
    res.criteria.push_back(crit("bessel.small_r_slope", slope, range(-1 - sltol, -1 + sltol), std::abs(slope + 1) <= sltol));
}

ExperimentResult run_identities(const Config& cfg) {
    ExperimentResult res;
    identity_suite(&cfg, Families{}, res);
    special_suite(&cfg, res);
    return res;
}

// ---------------------------------------------------------------- gff-cov

std::vector<std::pair<int, int>> pick_pairs(const GridDomain& dom, int count, std::uint64_t seed) {
    Rng rng = make_stream(seed, 0, StreamTag::misc);
    boost::random::uniform_int_distribution<int> U(0, dom.n() - 1), off(-3, 3);
    std::vector<std::pair<int, int>> out;
    while (static_cast<int>(out.size()) < count) {
        int z = U(rng);
        auto s = dom.site(z);
        int w = dom.index(s[0] + off(rng), s[1] + off(rng));
        if (w >= 0) out.push_back({z, w});
    }
    return out;
}

ExperimentResult run_gff_cov(const Config& cfg, const RunOptions& opt) {
    ExperimentResult res;
    auto dom = cfg.domain();
    GreenTable G(dom);
    const int np = static_cast<int>(cfg.integer("pairs"));
    auto pairs = pick_pairs(dom, np, cfg.seed());
    std::vector<int> orders;
    for (long n : cfg.ints("orders")) orders.push_back(static_cast<int>(n));
    auto table = wick_cov_table(G, orders, pairs, cfg.seed(), cfg.integer("samples"), opt.workers);
    const double zb = cfg.num("criteria.z_bound");
    const long min_pass = cfg.integer("criteria.min_pass");
    Table t{"wick_covariance", {"n", "m", "z", "w", "G_zw", "empirical", "theoretical", "se", "z_score"}, {}};
    Plot p{"wick_covariance_z", "Wick covariance z-scores", "pair", "z-score", false, false, {}};
    for (auto& o : table) {
        long ok = 0;
        Series s{"n=" + std::to_string(o.n) + ",m=" + std::to_string(o.m), {}, {}};
        for (size_t k = 0; k < o.stats.size(); ++k) {
            auto& st = o.stats[k];
            ok += std::abs(st.z_score()) <= zb;
            t.rows.push_back({double(o.n), double(o.m), double(st.z), double(st.w), G(st.z, st.w), st.empirical,
                              st.theoretical, st.se, st.z_score()});
            s.x.push_back(double(k));
            s.y.push_back(st.z_score());
        }
        p.series.push_back(std::move(s));
        if (o.n == o.m)
            res.criteria.push_back(crit("wick.covariance.n" + std::to_string(o.n), ok, min_pass, ok >= min_pass));
        else
            res.criteria.push_back(crit("wick.orthogonality.n" + std::to_string(o.n) + "_m" + std::to_string(o.m), ok,
                                        long(o.stats.size()), ok == long(o.stats.size())));
    }
    res.tables.push_back(std::move(t));
    res.plots.push_back(std::move(p));
    return res;
}

// ---------------------------------------------------------------- fps-law

FpsSetup fps_setup(const Config& cfg, const GreenTable& G, const RunOptions& opt) {
    FpsSetup st;
    st.G = &G;
    st.v = cfg.num("v");
    st.a = cfg.num("a");
    st.delta = cfg.num("delta");
    st.mode = cfg.v_mode();
    st.seed = cfg.seed();
    st.workers = opt.workers;
    return st;
}

bool st_mode_is_metric(const Config& cfg) { return cfg.v_mode() == VMode::metric; }

bool wants(const Config& cfg, const std::string& part) {
    if (!cfg.has("parts")) return true;
    auto p = cfg.strs("parts");
    return std::find(p.begin(), p.end(), part) != p.end();
}

// V_A at the centre in continuum units, +inf where the centre lies in A.
std::vector<double> center_law_samples(const FpsSetup& st, long samples, VMode mode) {
    const int z = st.dom().center();
    auto parts = parallel_chunks(samples, st.chunk, st.workers, [&](long b, long e) {
        std::vector<double> out;
        for (long i = b; i < e; ++i) {
            auto d = draw_fps(st, i, false);
            double V = v_at_vertex(d.fps, *st.G, z, mode);
            out.push_back(std::isnan(V) ? INFINITY : V / st.units());
        }
        return out;
    });
    std::vector<double> all;
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    return all;
}

// Kolmogorov-Smirnov distance to the hitting time of 0 from v (A counted at +inf).
double ks_hitting(std::vector<double> x, double v) {
    std::sort(x.begin(), x.end());
    const double n = double(x.size());
    double d = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double F = std::isinf(x[i]) ? 1.0 : hitting_cdf(v, x[i]);
        d = std::max({d, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
    }
    return d;
}

ExperimentResult run_fps_law(const Config& cfg, const RunOptions& opt) {
    ExperimentResult res;
    const double v = cfg.num("v") - cfg.num("a");
    if (wants(cfg, "mean")) {
        auto dom = GridDomain::disk(cfg.num("domain.scale"), 2 * cfg.num("domain.scale") / (cfg.integer("mean_across") - 1));
        GreenTable G(dom);
        auto st = fps_setup(cfg, G, opt);
        const long n = cfg.integer("mean_samples");
        auto parts = parallel_chunks(n, st.chunk, st.workers, [&](long b, long e) {
            MeanAcc m;
            for (long i = b; i < e; ++i) {
                auto d = draw_fps(st, i, false);
                m.add(d.fps.mass(d.field, dom) / st.delta);
            }
            return m;
        });
        MeanAcc m;
        for (auto& p : parts) m.merge(p);
        const double target = v * dom.area();
        const double zs = std::abs(m.mean() - target) / m.se();
        res.tables.push_back({"mean_measure", {"across", "samples", "mass_mean", "mass_se", "v_leb"},
                              {{double(cfg.integer("mean_across")), double(n), m.mean(), m.se(), target}}});
        res.criteria.push_back(crit("fps.mean_measure", zs, cfg.num("criteria.mean_se"), zs <= cfg.num("criteria.mean_se")));
    }
    if (wants(cfg, "ks")) {
        auto fine = cfg.domain();
        auto coarse = GridDomain::disk(cfg.num("domain.scale"), 2 * cfg.num("domain.scale") / (cfg.integer("compare_across") - 1));
        GreenTable Gf(fine), Gc(coarse);
        const long n = cfg.integer("ks_samples");
        const long seeds = cfg.integer("trend_seeds");
        const bool diag = st_mode_is_metric(cfg) && cfg.flag("vertex_diagnostic");
        const double across[2] = {double(cfg.integer("domain.across")), double(cfg.integer("compare_across"))};
        Table t{"cr_law_ks", {"seed", "across", "ks", "ks_vertex_mode"}, {}};
        double worst = 0;
        long trend = 0;
        std::vector<double> primary;
        for (long j = 0; j < seeds; ++j) {
            double ks[2];
            int idx = 0;
            for (auto* G : {&Gf, &Gc}) {
                auto st = fps_setup(cfg, *G, opt);
                st.seed = cfg.seed() + j;
                auto x = center_law_samples(st, n, st.mode);
                ks[idx] = ks_hitting(x, v);
                double kv = NAN;
                if (diag) kv = ks_hitting(center_law_samples(st, n, VMode::vertex), v);
                t.rows.push_back({double(st.seed), across[idx], ks[idx], kv});
                if (j == 0 && idx == 0) primary = x;
                ++idx;
            }
            worst = std::max(worst, ks[0]);
            trend += ks[0] < ks[1];
        }
        res.tables.push_back(std::move(t));
        // empirical distribution function of the primary seed against the law
        std::sort(primary.begin(), primary.end());
        Plot p{"cr_law_cdf", "V_A at the centre: empirical vs exact law", "t", "P(V_A <= t)", true, false, {}};
        Series emp{"empirical", {}, {}}, law{"hitting time law", {}, {}};
        Table c{"cr_law_cdf", {"t", "empirical_cdf", "law_cdf"}, {}};
        for (double q = 0.05; q <= 2000; q *= 1.25) {
            double F = double(std::upper_bound(primary.begin(), primary.end(), q) - primary.begin()) / primary.size();
            emp.x.push_back(q);
            emp.y.push_back(F);
            law.x.push_back(q);
            law.y.push_back(hitting_cdf(v, q));
            c.rows.push_back({q, F, hitting_cdf(v, q)});
        }
        p.series = {emp, law};
        res.plots.push_back(std::move(p));
        res.tables.push_back(std::move(c));
        const double kb = cfg.num("criteria.ks_bound");
        res.criteria.push_back(crit("fps.cr_law.ks", worst, kb, worst <= kb));
        const long tm = cfg.integer("criteria.trend_min");
        res.criteria.push_back(crit("fps.cr_law.mesh_trend", trend, tm, trend >= tm));
    }
    return res;
}

// ---------------------------------------------------------------- expansion

ExperimentResult run_expansion(const Config& cfg, const RunOptions& opt) {
    ExperimentResult res;
    auto dom = cfg.domain();
    GreenTable G(dom);
    auto st = fps_setup(cfg, G, opt);
    const double v = st.v - st.a;
    const auto sg = cfg.nums("s_grid");

    if (wants(cfg, "expectation")) {
        auto rows = expectation_check(st, sg, cfg.integer("samples"), static_cast<int>(cfg.integer("n_trunc")));
        Table t{"expectation", {"eps", "loge_over_2pi", "p_emp", "p_se", "p_emp_excl_a", "closed_form", "series_pred", "next_term"}, {}};
        Plot p{"expectation", "P(z0 in N_eps)", "(1/2pi)|log eps|", "probability", true, true, {}};
        Series se{"empirical", {}, {}}, sc{"closed form", {}, {}}, ss{"truncated series", {}, {}};
        double worst = 0, trunc = 0;
        bool mono = true;
        for (size_t k = 0; k < rows.size(); ++k) {
            auto& r = rows[k];
            t.rows.push_back({eps_of(r.s), r.s, r.p_emp, r.p_se, r.p_emp_excl, r.closed, r.series, r.next_bound});
            double tol = std::max(cfg.num("criteria.expect_se") * r.p_se, cfg.num("criteria.expect_abs"));
            worst = std::max(worst, std::abs(r.p_emp - r.closed) / tol);
            trunc = std::max(trunc, std::abs(r.series - r.closed) / r.next_bound);
            if (k > 0 && r.p_emp > rows[k - 1].p_emp) mono = false;
            se.x.push_back(r.s);
            se.y.push_back(r.p_emp);
            sc.x.push_back(r.s);
            sc.y.push_back(r.closed);
            ss.x.push_back(r.s);
            ss.y.push_back(r.series);
        }
        p.series = {se, sc, ss};
        res.tables.push_back(std::move(t));
        res.plots.push_back(std::move(p));
        res.criteria.push_back(crit("expansion.expectation", worst, 1.0, worst <= 1.0));
        res.criteria.push_back(crit("expansion.truncation", trunc, 1.0, trunc <= 1.0));
        res.criteria.push_back(crit("expansion.expectation_monotone", mono, true, mono));
    }

    const long mk_n = cfg.integer("minkowski_samples");
    if (wants(cfg, "minkowski") || wants(cfg, "doubling")) {
        auto mk = minkowski_leading(st, sg, mk_n);
        if (wants(cfg, "minkowski")) {
            Table t{"minkowski", {"eps", "loge_over_2pi", "area_mean", "area_se", "rescaled", "rescaled_se", "rescaled_excl_a",
                                  "rescaled_excl_a_se", "expected"}, {}};
            Plot p{"minkowski", "(1/2)|log eps|^{1/2} E[area of N_eps]", "|log eps|", "rescaled area", true, true, {}};
            Series s1{"mask with A", {}, {}}, s2{"mask without A", {}, {}}, s3{"finite-eps closed form", {}, {}};
            for (auto& r : mk.rows) {
                double g = 0.5 * std::sqrt(2 * pi * r.s);
                t.rows.push_back({eps_of(r.s), r.s, r.mink / g, r.se / g, r.mink, r.se, r.mink_excl, r.se_excl, r.expected});
                s1.x.push_back(2 * pi * r.s);
                s1.y.push_back(r.mink);
                s2.x.push_back(2 * pi * r.s);
                s2.y.push_back(r.mink_excl);
                s3.x.push_back(2 * pi * r.s);
                s3.y.push_back(r.expected);
            }
            p.series = {s1, s2, s3};
            res.tables.push_back(std::move(t));
            res.plots.push_back(std::move(p));
            const long rc = cfg.integer("criteria.ratio_count");
            ojson ratios = ojson::array();
            bool ok = static_cast<long>(mk.ratios.size()) >= rc - 1;
            // ratios between consecutive values among the rc finest eps
            for (size_t k = mk.ratios.size() >= size_t(rc - 1) ? mk.ratios.size() - (rc - 1) : 0; k < mk.ratios.size(); ++k) {
                ratios.push_back(mk.ratios[k]);
                ok = ok && mk.ratios[k] >= cfg.num("criteria.ratio_lo") && mk.ratios[k] <= cfg.num("criteria.ratio_hi");
            }
            res.criteria.push_back(crit("expansion.minkowski.ratios", ratios,
                                        range(cfg.num("criteria.ratio_lo"), cfg.num("criteria.ratio_hi")), ok));
            const double target = v * dom.area();
            const double rel = std::abs(mk.rows.back().mink / target - 1);
            res.criteria.push_back(crit("expansion.minkowski.mass", rel, cfg.num("criteria.mass_rel"), rel <= cfg.num("criteria.mass_rel")));
            res.tables.push_back({"minkowski_mass", {"finest_rescaled", "finest_se", "lattice_mass", "lattice_mass_se", "v_leb"},
                                  {{mk.rows.back().mink, mk.rows.back().se, mk.mass, mk.mass_se, target}}});
        }
        if (wants(cfg, "doubling")) {
            FpsSetup st2 = st;
            st2.v = st.a + 2 * v;
            auto mk2 = minkowski_leading(st2, {sg.back()}, mk_n);
            const double ratio = mk2.rows[0].mink / mk.rows.back().mink;
            const double rel = std::abs(ratio / 2 - 1);
            res.tables.push_back({"minkowski_doubling", {"v", "rescaled", "rescaled_se"},
                                  {{v, mk.rows.back().mink, mk.rows.back().se}, {2 * v, mk2.rows[0].mink, mk2.rows[0].se}}});
            res.criteria.push_back(crit("expansion.minkowski.doubling", ratio,
                                        range(2 * (1 - cfg.num("criteria.doubling_rel")), 2 * (1 + cfg.num("criteria.doubling_rel"))),
                                        rel <= cfg.num("criteria.doubling_rel")));
        }
    }

    if (wants(cfg, "second_moment")) {
        const auto s2 = cfg.nums("second_moment_s");
        const double rho = cfg.num("bump_radius"), off = cfg.num("bump_offset");
        auto fc = bump(dom, 0, 0, rho), fl = bump(dom, -off, 0, rho), fr = bump(dom, off, 0, rho);
        const long n = cfg.integer("second_moment_samples");
        auto same = second_moment_leading(st, fc, fc, s2, n);
        auto apart = second_moment_leading(st, fl, fr, s2, n);
        Table t{"second_moment", {"eps", "loge_over_2pi", "m2_same", "m2_same_se", "scaled_same", "m2_apart", "m2_apart_se", "scaled_apart"}, {}};
        Plot p{"second_moment", "E[(1_N,f1)(1_N,f2)]", "|log eps|", "second moment", true, true, {}};
        Series a{"same bump", {}, {}}, b{"disjoint bumps", {}, {}};
        for (size_t k = 0; k < same.rows.size(); ++k) {
            auto& r = same.rows[k];
            auto& q = apart.rows[k];
            t.rows.push_back({eps_of(r.s), r.s, r.m2, r.m2_se, r.scaled, q.m2, q.m2_se, q.scaled});
            a.x.push_back(2 * pi * r.s);
            a.y.push_back(r.m2);
            b.x.push_back(2 * pi * r.s);
            b.y.push_back(q.m2);
        }
        p.series = {a, b};
        res.tables.push_back(std::move(t));
        res.plots.push_back(std::move(p));
        res.tables.push_back({"second_moment_leading",
                              {"same_minkowski", "same_minkowski_se", "same_measure", "same_measure_se", "apart_minkowski",
                               "apart_minkowski_se", "apart_measure", "apart_measure_se", "slope", "slope_hw"},
                              {{same.leading, same.leading_se, same.leading_measure, same.leading_measure_se, apart.leading,
                                apart.leading_se, apart.leading_measure, apart.leading_measure_se, same.slope, same.slope_hw}}});
        res.criteria.push_back(crit("second_moment.positive", same.leading, 0.0, same.leading > 0));
        res.criteria.push_back(crit("second_moment.decorrelation", apart.leading, same.leading, apart.leading < same.leading));
        const double target = cfg.num("criteria.second_moment_slope"), tol = cfg.num("criteria.second_moment_tol");
        res.criteria.push_back(crit("second_moment.slope", same.slope, range(target - tol, target + tol),
                                    std::abs(same.slope - target) <= tol));
    }

    if (wants(cfg, "residual")) {
        auto rr = residual_report(st, cfg.nums("residual_s"), cfg.num("eta"), cfg.num("psi3_base"), cfg.integer("residual_samples"));
        Table t{"residual", {"eps", "loge_over_2pi", "resid_norm_n0", "resid_n0_se", "resid_norm_n1", "resid_n1_se"}, {}};
        Plot p{"residual", "H^{-eta} residual norms", "|log eps|", "RMS residual norm", true, true, {}};
        Series a{"N=0", {}, {}}, b{"N=1", {}, {}};
        bool dec = true;
        for (size_t k = 0; k < rr.rows.size(); ++k) {
            auto& r = rr.rows[k];
            t.rows.push_back({eps_of(r.s), r.s, r.resid0, r.resid0_se, r.resid1, r.resid1_se});
            if (k > 0 && r.resid0 >= rr.rows[k - 1].resid0) dec = false;
            a.x.push_back(2 * pi * r.s);
            a.y.push_back(r.resid0);
            b.x.push_back(2 * pi * r.s);
            b.y.push_back(r.resid1);
        }
        p.series = {a, b};
        res.tables.push_back(std::move(t));
        res.plots.push_back(std::move(p));
        res.tables.push_back({"residual_slopes", {"eta", "slope_n0", "slope_n0_hw", "slope_n1", "slope_n1_hw"},
                              {{rr.eta, rr.slope0, rr.slope0_hw, rr.slope1, rr.slope1_hw}}});
        res.criteria.push_back(crit("residual.n0_decreasing", dec, true, dec));
        const double sb = cfg.num("criteria.residual_slope");
        res.criteria.push_back(crit("residual.n0_slope", rr.slope0, sb, rr.slope0 < sb));
        const auto& last = rr.rows.back();
        res.criteria.push_back(crit("residual.ordering", ojson::array({last.resid0, last.resid1}), "n1 < n0", last.resid1 < last.resid0));
    }
    return res;
}

// ---------------------------------------------------------------- multiscale

ExperimentResult run_multiscale(const Config& cfg, const RunOptions& opt) {
    ExperimentResult res;
    auto dom = cfg.domain();
    GreenTable G(dom);
    auto st = fps_setup(cfg, G, opt);
    const int n = static_cast<int>(cfg.integer("n"));
    const long N = cfg.integer("samples");
    auto pa = multiscale_psi(st, cfg.num("base_s"), cfg.nums("alphas_a"), n, N);
    auto pb = multiscale_psi(st, cfg.num("base_s"), cfg.nums("alphas_b"), n, N);
    const double target = std::pow(st.v - st.a, 2 * n + 1) * dom.area();
    Table t{"multiscale_psi", {"grid", "order", "base_s", "total", "total_se", "target"}, {}};
    t.rows.push_back({0, double(pa.order), pa.base_s, pa.total, pa.total_se, target});
    t.rows.push_back({1, double(pb.order), pb.base_s, pb.total, pb.total_se, target});
    res.tables.push_back(std::move(t));
    // radial profile of both fields
    Table r{"multiscale_profile", {"radius", "field_a", "field_b", "vertices"}, {}};
    const int bins = 16;
    std::vector<double> fa(bins, 0.0), fb(bins, 0.0), cnt(bins, 0.0);
    for (int z = 0; z < dom.n(); ++z) {
        int b = std::min(bins - 1, static_cast<int>(std::hypot(dom.x(z), dom.y(z)) / dom.scale() * bins));
        fa[b] += pa.field[z];
        fb[b] += pb.field[z];
        cnt[b] += 1;
    }
    Plot p{"multiscale_profile", "multi-scale psi estimate, radial average", "radius", "density", false, false, {}};
    Series sa{"grid a", {}, {}}, sb{"grid b", {}, {}};
    for (int b = 0; b < bins; ++b) {
        if (cnt[b] == 0) continue;
        double rad = (b + 0.5) * dom.scale() / bins;
        r.rows.push_back({rad, fa[b] / cnt[b], fb[b] / cnt[b], cnt[b]});
        sa.x.push_back(rad);
        sa.y.push_back(fa[b] / cnt[b]);
        sb.x.push_back(rad);
        sb.y.push_back(fb[b] / cnt[b]);
    }
    p.series = {sa, sb};
    res.tables.push_back(std::move(r));
    res.plots.push_back(std::move(p));
    const double comb = std::abs(pa.total - pb.total) / std::hypot(pa.total_se, pb.total_se);
    res.criteria.push_back(crit("psi.grid_agreement", comb, cfg.num("criteria.combined_se"), comb <= cfg.num("criteria.combined_se")));
    const double zm = std::abs(pa.total - target) / pa.total_se;
    res.criteria.push_back(crit("psi.mean_mass", zm, cfg.num("criteria.mass_se"), zm <= cfg.num("criteria.mass_se")));
    return res;
}

// ---------------------------------------------------------------- gmc

std::vector<int> fixed_vertices(const GridDomain& dom) {
    const double h = dom.h(), R = dom.scale();
    std::vector<std::array<double, 2>> pts{{0, 0}, {0.25 * R, 0}, {-0.25 * R, 0}, {0, 0.25 * R}, {0, -0.5 * R}};
    std::vector<int> out;
    for (auto& p : pts) {
        int z = dom.index(static_cast<int>(std::lround(p[0] / h)), static_cast<int>(std::lround(p[1] / h)));
        if (z < 0) throw ConfigError("gmc: fixed vertex outside the domain");
        out.push_back(z);
    }
    return out;
}

ExperimentResult run_gmc(const Config& cfg, const RunOptions& opt) {
    ExperimentResult res;
    auto dom = cfg.domain();
    GreenTable G(dom);
    auto st = fps_setup(cfg, G, opt);
    auto gammas = cfg.nums("gammas");
    const int n = static_cast<int>(cfg.integer("n"));
    const long seeds = cfg.integer("seed_count");
    Table t{"gmc_gap", {"seed", "gamma", "germ_mass", "germ_se", "psi_mass", "psi_se", "gap", "gap_se"}, {}};
    long improved = 0;
    std::vector<MeanAcc> germ(gammas.size());
    std::vector<std::vector<double>> gaps(gammas.size());
    for (long j = 0; j < seeds; ++j) {
        FpsSetup sj = st;
        sj.seed = cfg.seed() + j;
        auto rep = gmc_cross_validate(sj, gammas, n, cfg.num("psi_base_s"), cfg.nums("alphas"), cfg.integer("samples"));
        for (size_t k = 0; k < rep.rows.size(); ++k) {
            auto& r = rep.rows[k];
            t.rows.push_back({double(sj.seed), r.gamma, r.germ_mass, r.germ_se, rep.psi_mass, rep.psi_se, r.gap, r.gap_se});
            germ[k].add(r.germ_mass);
            gaps[k].push_back(std::abs(r.gap));
        }
        // gamma grid runs from largest to smallest
        improved += std::abs(rep.rows.back().gap) < std::abs(rep.rows.front().gap);
    }
    res.tables.push_back(std::move(t));
    Plot p{"gmc_gap", "|germ mass - psi mass| by seed", "gamma", "|gap|", true, true, {}};
    for (long j = 0; j < seeds; ++j) {
        Series s{"seed " + std::to_string(cfg.seed() + j), {}, {}};
        for (size_t k = 0; k < gammas.size(); ++k) {
            s.x.push_back(gammas[k]);
            s.y.push_back(gaps[k][j]);
        }
        p.series.push_back(std::move(s));
    }
    res.plots.push_back(std::move(p));
    const double frac = double(improved) / seeds;
    res.criteria.push_back(crit("gmc.odd_trend", frac, cfg.num("criteria.min_fraction"), frac >= cfg.num("criteria.min_fraction")));
    if (n == 1) {
        bool pos = true;
        ojson vals = ojson::array();
        for (auto& g : germ) {
            vals.push_back(g.mean());
            pos = pos && g.mean() > 0;
        }
        res.criteria.push_back(crit("gmc.germ_positive", vals, 0.0, pos));
    }
    auto verts = fixed_vertices(dom);
    auto even = gmc_even_pointwise(st, cfg.num("even_gamma"), verts, cfg.integer("even_samples"));
    Table e{"gmc_even", {"vertex", "x", "y", "median_rel_dev", "samples_outside_a"}, {}};
    double worst = 0;
    for (size_t k = 0; k < verts.size(); ++k) {
        e.rows.push_back({double(verts[k]), dom.x(verts[k]), dom.y(verts[k]), even.median_rel_dev[k], double(even.n_defined[k])});
        worst = std::isnan(even.median_rel_dev[k]) ? INFINITY : std::max(worst, even.median_rel_dev[k]);
    }
    res.tables.push_back(std::move(e));
    res.criteria.push_back(crit("gmc.even_pointwise", worst, cfg.num("criteria.even_tol"), worst <= cfg.num("criteria.even_tol")));
    return res;
}

// ---------------------------------------------------------------- sausage

ExperimentResult run_sausage(const Config& cfg, const RunOptions& opt) {
    ExperimentResult res;
    auto eps = cfg.nums("eps_grid");
    const double M = cfg.num("M");
    auto rows = sausage_leading(M, eps, cfg.seed(), 0, cfg.integer("paths"), opt.workers);
    std::sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.eps > b.eps; });
    Table t{"sausage_leading", {"eps", "log_eps_abs", "ratio_mean", "ratio_se", "ratio_of_means"}, {}};
    Plot p{"sausage_leading", "(1/pi)|log eps| area / lifetime", "|log eps|", "ratio", true, false, {}};
    Series a{"mean of per-path ratios", {}, {}}, b{"ratio of means", {}, {}};
    for (auto& r : rows) {
        t.rows.push_back({r.eps, std::abs(std::log(r.eps)), r.mean, r.se, r.ratio_of_means});
        a.x.push_back(std::abs(std::log(r.eps)));
        a.y.push_back(r.mean);
        b.x.push_back(std::abs(std::log(r.eps)));
        b.y.push_back(r.ratio_of_means);
    }
    p.series = {a, b};
    res.tables.push_back(std::move(t));
    res.plots.push_back(std::move(p));
    const auto& fine = rows.back();
    const double lo = cfg.num("criteria.ratio_lo"), hi = cfg.num("criteria.ratio_hi");
    res.criteria.push_back(crit("sausage.leading_ratio", fine.mean, range(lo, hi), fine.mean >= lo && fine.mean <= hi));
    if (rows.size() > 1) {
        const auto& coarse = rows.front();
        res.criteria.push_back(crit("sausage.leading_trend", ojson::array({coarse.mean, fine.mean}), "closer to 1 at smaller eps",
                                    std::abs(fine.mean - 1) < std::abs(coarse.mean - 1)));
    }

    // two-point occupation function on random separated cells
    const double cell = cfg.num("two_point_cell");
    Rng rng = make_stream(cfg.seed(), 1, StreamTag::misc);
    boost::random::uniform_real_distribution<double> U(-0.6, 0.6);
    std::vector<std::pair<Point, Point>> pairs;
    auto snap = [&](double x) { return (std::floor(x / cell) + 0.5) * cell; };
    while (static_cast<long>(pairs.size()) < cfg.integer("two_point_pairs")) {
        Point z{snap(U(rng)), snap(U(rng))}, w{snap(U(rng)), snap(U(rng))};
        if (std::hypot(z[0], z[1]) < 0.15 || std::hypot(w[0], w[1]) < 0.15) continue;
        if (std::hypot(z[0] - w[0], z[1] - w[1]) < 0.2) continue;
        pairs.push_back({z, w});
    }
    auto tp = two_point_check(cfg.num("two_point_M"), pairs, cfg.num("two_point_dt"), cell, cfg.seed(), 0,
                              cfg.integer("two_point_paths"), opt.workers);
    Table q{"two_point", {"zx", "zy", "wx", "wy", "empirical", "se", "theoretical_cell", "theoretical_point", "z_score"}, {}};
    long ok = 0;
    for (auto& s : tp) {
        q.rows.push_back({s.z[0], s.z[1], s.w[0], s.w[1], s.empirical, s.se, s.theoretical, s.theoretical_point, s.z_score()});
        ok += std::abs(s.z_score()) <= cfg.num("criteria.z_bound");
    }
    res.tables.push_back(std::move(q));
    res.criteria.push_back(crit("sausage.two_point", ok, cfg.integer("criteria.min_pairs"), ok >= cfg.integer("criteria.min_pairs")));

    boost::random::uniform_real_distribution<double> X(-3, 3);
    double worst = 0;
    Table m{"mass_change", {"x", "u1", "u2", "n", "residual"}, {}};
    const long nmax = cfg.integer("mass_change_n");
    for (long i = 0; i < cfg.integer("mass_change_inputs"); ++i) {
        double x = X(rng), u1 = X(rng), u2 = X(rng);
        int n = 1 + static_cast<int>(i % nmax);
        double r = mass_change_check(x, u1, u2, n);
        m.rows.push_back({x, u1, u2, double(n), r});
        worst = std::max(worst, r);
    }
    res.tables.push_back(std::move(m));
    res.criteria.push_back(crit("sausage.mass_change", worst, cfg.num("criteria.mass_change_tol"), worst <= cfg.num("criteria.mass_change_tol")));
    return res;
}

// ---------------------------------------------------------------- collar

// Slope over q_grid of E int_{V <= q} V^k under the exact law of V at a point
// (hitting time of 0 from v, density v exp(-v^2/2u) / sqrt(2 pi u^3)).
double exact_law_slope(double v, int k, const std::vector<double>& q) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    std::vector<double> y;
    for (double x : q)
        y.push_back(GK::integrate(
            [&](double u) { return u > 0 ? std::pow(u, k) * v * std::exp(-v * v / (2 * u)) / std::sqrt(2 * pi * u * u * u) : 0.0; },
            0.0, x, 15, 1e-12));
    return loglog_slope(q, y);
}

ExperimentResult run_collar(const Config& cfg, const RunOptions& opt) {
    ExperimentResult res;
    auto dom = cfg.domain();
    GreenTable G(dom);
    auto st = fps_setup(cfg, G, opt);
    auto qg = cfg.nums("q_grid"), qe = cfg.nums("q_ext");
    Table t{"collar", {"k", "q", "mean", "se"}, {}};
    Table s{"collar_slopes", {"k", "slope", "slope_hw", "target", "exact_law_slope", "slope_ext", "slope_ext_hw", "exact_law_slope_ext"}, {}};
    Plot p{"collar", "E int_{V<=q} V^k", "q", "mean", true, true, {}};
    const double tol = cfg.num("criteria.slope_tol");
    for (long k : cfg.ints("k")) {
        auto c = collar_divergence(st, static_cast<int>(k), qg, qe, cfg.integer("samples"));
        Series ser{"k=" + std::to_string(k), {}, {}};
        for (size_t j = 0; j < c.q.size(); ++j) {
            t.rows.push_back({double(k), c.q[j], c.mean[j], c.se[j]});
            ser.x.push_back(c.q[j]);
            ser.y.push_back(c.mean[j]);
        }
        for (size_t j = 0; j < c.q_ext.size(); ++j) {
            t.rows.push_back({double(k), c.q_ext[j], c.mean_ext[j], NAN});
            ser.x.push_back(c.q_ext[j]);
            ser.y.push_back(c.mean_ext[j]);
        }
        p.series.push_back(std::move(ser));
        const double v = st.v - st.a;
        const double ex = exact_law_slope(v, static_cast<int>(k), qg);
        const double ex2 = qe.size() >= 2 ? exact_law_slope(v, static_cast<int>(k), qe) : NAN;
        s.rows.push_back({double(k), c.slope, c.slope_hw, k - 0.5, ex, c.slope_ext, c.slope_ext_hw, ex2});
        if (k == 0) {
            double top = *std::max_element(c.mean.begin(), c.mean.end());
            res.criteria.push_back(crit("collar.k0_bounded", top, dom.area(), top <= dom.area()));
        } else {
            res.criteria.push_back(crit("collar.k" + std::to_string(k) + "_slope", c.slope, range(k - 0.5 - tol, k - 0.5 + tol),
                                        std::abs(c.slope - (k - 0.5)) <= tol));
        }
    }
    res.tables.push_back(std::move(t));
    res.tables.push_back(std::move(s));
    res.plots.push_back(std::move(p));
    return res;
}

const std::map<std::string, std::string>& descriptions() {
    static const std::map<std::string, std::string> d = {
        {"identity.change_var", "Hermite change of variance, exact"},
        {"identity.binomial", "Hermite binomial identity, exact"},
        {"identity.exp_gen", "Hermite exponential generating function, exact"},
        {"identity.two_var", "two-variable Hermite lemma, exact"},
        {"identity.laguerre_norm", "Laguerre change of normalization, exact"},
        {"identity.reexp_hermite", "Hermite reexpansion, exact to the truncation degree"},
        {"identity.reexp_laguerre", "Laguerre reexpansion, exact to the truncation degree"},
        {"identity.combi", "Hermite combinatorial values 0 and 1 for odd n"},
        {"umbral.group_axioms", "umbral composition: identity, inverse, associativity"},
        {"umbral.hermite_subgroup", "Hermite one-parameter subgroup law"},
        {"umbral.laguerre_subgroup", "Laguerre one-parameter subgroup law"},
        {"nullspace.hermite", "Hermite consistency system: one-dimensional nullspace, closed-form ratios"},
        {"nullspace.laguerre", "Laguerre consistency system: one-dimensional nullspace, closed-form ratios"},
        {"series.p_hit", "hitting-probability series against erf"},
        {"bessel.k0_at_1", "K_0(1) against the quadrature oracle"},
        {"bessel.potential_at_0", "Bessel potential K_1.5(0) = 1/(2 pi)"},
        {"bessel.small_r_slope", "Bessel potential eta = 0.5 small-r slope"},
        {"fps.mean_measure", "first passage set mean measure E[nu_A(D)] = v Leb(D), in SE units"},
        {"fps.cr_law.ks", "law of V_A at the centre: KS distance to the hitting-time law"},
        {"fps.cr_law.mesh_trend", "KS distance smaller on the finer mesh (seeds)"},
        {"expansion.expectation", "P(z0 in N_eps) against erf, in units of max(3 SE, 0.02)"},
        {"expansion.truncation", "truncated series within the next-term bound"},
        {"expansion.expectation_monotone", "P(z0 in N_eps) decreasing in |log eps|"},
        {"expansion.minkowski.ratios", "Minkowski leading order: consecutive ratios at the finest eps"},
        {"expansion.minkowski.mass", "Minkowski content against v Leb(D), relative"},
        {"expansion.minkowski.doubling", "doubling v doubles the Minkowski mass"},
        {"second_moment.positive", "second-moment leading coefficient positive"},
        {"second_moment.decorrelation", "disjoint bumps give a smaller coefficient"},
        {"second_moment.slope", "log-log slope of the second moment in |log eps|"},
        {"residual.n0_decreasing", "N=0 residual norm decreasing"},
        {"residual.n0_slope", "N=0 residual decay slope"},
        {"residual.ordering", "N=1 residual below N=0 at the finest eps"},
        {"psi.grid_agreement", "multi-scale psi_3 mass: two alpha grids agree, combined SE units"},
        {"psi.mean_mass", "multi-scale psi_3 mass against v^3 Leb(D), SE units"},
        {"gmc.odd_trend", "GMC germ n=1: gap shrinks from largest to smallest gamma (fraction of seeds)"},
        {"gmc.germ_positive", "GMC germ n=1: mean mass positive"},
        {"gmc.even_pointwise", "GMC germ n=2 against -V_A at fixed vertices (median relative deviation)"},
        {"sausage.leading_ratio", "Wiener sausage leading order at the smallest eps"},
        {"sausage.leading_trend", "sausage ratio closer to 1 at the smaller eps"},
        {"sausage.two_point", "occupation two-point function, pairs within bound"},
        {"sausage.mass_change", "Laguerre change of killing rate, max relative residual"},
        {"collar.k0_bounded", "collar integral with k=0 bounded by Leb(D)"},
        {"collar.k1_slope", "collar divergence slope, k=1"},
        {"collar.k2_slope", "collar divergence slope, k=2"},
        {"selfcheck.smoke_gff", "smoke: lattice GFF variance at the centre"},
        {"selfcheck.smoke_fps", "smoke: FPS mean measure on a small disk"},
        {"selfcheck.determinism", "smoke: identical seeds give identical samples"},
    };
    return d;
}

}  // namespace

std::string criterion_description(const std::string& tag) {
    auto& d = descriptions();
    auto it = d.find(tag);
    if (it != d.end()) return it->second;
    if (tag.rfind("wick.covariance.", 0) == 0) return "Wick power covariance n! G^n, pairs within 4 SE";
    if (tag.rfind("wick.orthogonality.", 0) == 0) return "cross-order Wick orthogonality, pairs within 4 SE";
    if (tag.rfind("collar.", 0) == 0) return "collar divergence slope";
    return "";
}

ExperimentResult run_experiment(const Config& cfg, const RunOptions& opt) {
    ExperimentResult res;
    const auto& e = cfg.experiment();
    if (e == "identities") res = run_identities(cfg);
    else if (e == "gff-cov") res = run_gff_cov(cfg, opt);
    else if (e == "fps-law") res = run_fps_law(cfg, opt);
    else if (e == "expansion") res = run_expansion(cfg, opt);
    else if (e == "multiscale") res = run_multiscale(cfg, opt);
    else if (e == "gmc") res = run_gmc(cfg, opt);
    else if (e == "sausage") res = run_sausage(cfg, opt);
    else if (e == "collar") res = run_collar(cfg, opt);
    else throw ConfigError("unknown experiment '" + e + "'");
    res.experiment = e;
    res.config_echo = cfg.echo();
    return res;
}

ExperimentResult run_selfcheck(const Families& fam, const RunOptions& opt) {
    ExperimentResult res;
    res.experiment = "selfcheck";
    identity_suite(nullptr, fam, res);
    special_suite(nullptr, res);

    auto dom = GridDomain::disk_across(17);
    GreenTable G(dom);
    const int c = dom.center();
    MeanAcc var;
    for (long i = 0; i < 4000; ++i) {
        double x = sample_gff(G, 0.0, 99, i).values[c];
        var.add(x * x);
    }
    double z = std::abs(var.mean() - G.diag()[c]) / var.se();
    res.criteria.push_back(crit("selfcheck.smoke_gff", z, 4.0, z <= 4.0));

    FpsSetup st;
    st.G = &G;
    st.delta = 0.05;
    st.seed = 99;
    st.workers = opt.workers;
    MeanAcc mass;
    for (long i = 0; i < 1000; ++i) {
        auto d = draw_fps(st, i, false);
        mass.add(d.fps.mass(d.field, dom) / st.delta);
    }
    double zm = std::abs(mass.mean() - dom.area()) / mass.se();
    res.criteria.push_back(crit("selfcheck.smoke_fps", zm, 4.0, zm <= 4.0));

    bool same = sample_gff(G, 0.3, 5, 11).values == sample_gff(G, 0.3, 5, 11).values &&
                edge_uniforms(dom, 5, 11) == edge_uniforms(dom, 5, 11);
    res.criteria.push_back(crit("selfcheck.determinism", same, true, same));
    res.config_echo = ojson::object();
    return res;
}

std::string report_text(const std::string& out_dir) {
    namespace fs = std::filesystem;
    auto path = fs::path(out_dir) / "results.json";
    std::ifstream in(path);
    if (!in) throw std::runtime_error("no results at " + path.string());
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error("unreadable results at " + path.string() + ": " + e.what());
    }
    for (const char* k : {"experiment", "config_echo", "criteria", "tables"})
        if (!j.contains(k)) throw std::runtime_error(path.string() + ": missing field '" + k + "'");
    std::ostringstream os;
    long pass = 0, total = 0;
    os << "experiment: " << j["experiment"].get<std::string>() << "\n";
    if (j["config_echo"].contains("seed")) os << "seed: " << j["config_echo"]["seed"].dump() << "\n";
    for (auto& c : j["criteria"]) {
        bool ok = c["pass"].get<bool>();
        pass += ok;
        ++total;
        std::string tag = c["tag"].get<std::string>();
        os << (ok ? "  PASS  " : "  FAIL  ") << tag << "  value=" << c["value"].dump() << "  bound=" << c["bound"].dump();
        auto d = criterion_description(tag);
        if (!d.empty()) os << "  (" << d << ")";
        os << "\n";
    }
    os << pass << "/" << total << " criteria pass\n";
    os << "tables:";
    for (auto& t : j["tables"]) os << " " << t.get<std::string>();
    os << "\n";
    return os.str();
}

}  // namespace wb
