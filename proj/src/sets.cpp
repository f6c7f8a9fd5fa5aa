#include "wickbench/sets.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "wickbench/special.hpp"

namespace wb {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

int FirstPassageSet::size() const {
    int c = 0;
    for (char x : in_a) c += x != 0;
    return c;
}

double FirstPassageSet::mass(const FieldSample& s, const GridDomain& dom) const {
    double m = 0.0;
    for (int v = 0; v < dom.n(); ++v)
        if (in_a[v]) m += s.values[v] - level;
    return m * dom.h() * dom.h();
}

std::vector<double> edge_uniforms(const GridDomain& dom, std::uint64_t seed, std::uint64_t index) {
    Rng rng = make_stream(seed, index, StreamTag::edges);
    std::vector<double> u(dom.n_edges());
    for (auto& x : u) x = uniform01(rng);
    return u;
}

double bridge_touch_prob(double alpha, double beta) {
    if (alpha <= 0 || beta <= 0) return 1.0;
    return std::exp(-2 * alpha * beta);
}

double bridge_first_hit(double alpha, double beta, double u) {
    if (!(alpha > 0)) return 0.0;
    // P(tau <= t) for a unit bridge from alpha to beta, unnormalised: the
    // bridge is below 0 at time t, or above 0 after touching (reflection).
    const double e = std::exp(-2 * alpha * beta);
    auto cdf = [&](double t) {
        double s = std::sqrt(t * (1 - t));
        double m1 = alpha * (1 - t) + beta * t;
        double m2 = -alpha * (1 - t) + beta * t;
        return normal_cdf(-m1 / s) + e * (1 - normal_cdf(-m2 / s));
    };
    const double total = beta > 0 ? e : 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (cdf(mid) < u * total)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

FirstPassageSet extract_fps(const FieldSample& s, const GridDomain& dom, double a, const std::vector<double>& edge_u) {
    if (!(a < s.boundary_value)) throw std::invalid_argument("extract_fps: level must lie below the boundary value");
    const int n = dom.n();
    const auto& phi = s.values;
    const double vb = s.boundary_value;
    FirstPassageSet f;
    f.level = a;
    f.in_a.assign(n, 0);
    f.open_edges.assign(dom.n_edges(), 0);
    f.extra.assign(n, 0.0);
    auto other = [&](int v, int d) { return dom.nbr(v, d) >= 0 ? phi[dom.nbr(v, d)] : vb; };
    for (int v = 0; v < n; ++v)
        for (int d = 0; d < 4; ++d) {
            int e = dom.edge(v, d);
            double x = phi[v] - a, y = other(v, d) - a;
            if (x >= 0 && y >= 0 && edge_u[e] >= bridge_touch_prob(x, y)) f.open_edges[e] = 1;
        }
    std::vector<int> queue;
    for (int v = 0; v < n; ++v)
        for (int d = 0; d < 4; ++d)
            if (dom.nbr(v, d) < 0 && f.open_edges[dom.edge(v, d)] && !f.in_a[v]) {
                f.in_a[v] = 1;
                queue.push_back(v);
            }
    for (size_t q = 0; q < queue.size(); ++q) {
        int v = queue[q];
        for (int d = 0; d < 4; ++d) {
            int u = dom.nbr(v, d);
            if (u >= 0 && !f.in_a[u] && f.open_edges[dom.edge(v, d)]) {
                f.in_a[u] = 1;
                queue.push_back(u);
            }
        }
    }
    // Cut edges from A (or the boundary) into a retained vertex: the set
    // reaches along the cable up to the first zero of the bridge.
    for (int x = 0; x < n; ++x) {
        if (f.in_a[x]) continue;
        for (int d = 0; d < 4; ++d) {
            int y = dom.nbr(x, d);
            if (y >= 0 && !f.in_a[y]) continue;
            double alpha = other(x, d) - a, beta = phi[x] - a;
            double p = bridge_touch_prob(alpha, beta);
            double u = edge_u[dom.edge(x, d)] / p;
            double sh = bridge_first_hit(alpha, beta, std::min(u, 1.0 - 1e-16));
            f.extra[x] += 1.0 / (1.0 - sh) - 1.0;
        }
    }
    return f;
}

void compute_v(FirstPassageSet& fps, const GreenTable& G, VMode mode) {
    fps.v_values = v_field(G, fps.in_a, mode == VMode::metric ? &fps.extra : nullptr);
}

double v_at_vertex(const FirstPassageSet& fps, const GreenTable& G, int z, VMode mode) {
    if (fps.in_a[z]) return kNaN;
    return v_at(G, fps.in_a, z, mode == VMode::metric ? &fps.extra : nullptr);
}

double NeighborhoodMask::area(const GridDomain& dom, bool include_a) const {
    const auto& m = include_a ? with_a : mask;
    long c = 0;
    for (char x : m) c += x != 0;
    return c * dom.h() * dom.h();
}

NeighborhoodMask neighborhood_at(const FirstPassageSet& fps, double threshold) {
    if (fps.v_values.empty()) throw std::logic_error("neighborhood: V_A not computed");
    const size_t n = fps.in_a.size();
    NeighborhoodMask m{threshold, std::vector<char>(n, 0), std::vector<char>(n, 0)};
    for (size_t z = 0; z < n; ++z) {
        if (fps.in_a[z]) {
            m.with_a[z] = 1;
        } else if (fps.v_values[z] > threshold) {
            m.mask[z] = m.with_a[z] = 1;
        }
    }
    return m;
}

NeighborhoodMask neighborhood(const FirstPassageSet& fps, double eps, double units) {
    if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("neighborhood: eps must lie in (0,1]");
    return neighborhood_at(fps, units * std::abs(std::log(eps)) / (2 * std::numbers::pi));
}

NeighborhoodMask tilde_neighborhood(const FirstPassageSet& fps, const GridDomain& dom,
                                    const std::function<double(int)>& eps, double units) {
    if (dom.shape() != Shape::disk) throw std::invalid_argument("tilde_neighborhood: disk domains only");
    if (fps.v_values.empty()) throw std::logic_error("tilde_neighborhood: V_A not computed");
    const double c = 1 / (2 * std::numbers::pi);
    NeighborhoodMask m{kNaN, std::vector<char>(dom.n(), 0), std::vector<char>(dom.n(), 0)};
    for (int z = 0; z < dom.n(); ++z) {
        if (fps.in_a[z]) {
            m.with_a[z] = 1;
        } else if (c * std::log(dom.cr(z)) - fps.v_values[z] / units < c * std::log(eps(z))) {
            m.mask[z] = m.with_a[z] = 1;
        }
    }
    return m;
}

ClusterSet extract_sign_clusters(const FieldSample& s, const GridDomain& dom, const std::vector<double>& edge_u) {
    if (s.boundary_value != 0.0) throw std::invalid_argument("extract_sign_clusters: boundary value must be 0");
    const int n = dom.n();
    const auto& phi = s.values;
    // union-find over interior vertices
    std::vector<int> parent(n);
    for (int v = 0; v < n; ++v) parent[v] = v;
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (int v = 0; v < n; ++v)
        for (int d = 0; d < 2; ++d) {
            int u = dom.nbr(v, d);
            if (u < 0 || phi[v] * phi[u] <= 0) continue;
            if (edge_u[dom.edge(v, d)] >= bridge_touch_prob(std::abs(phi[v]), std::abs(phi[u]))) {
                int a = find(v), b = find(u);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    ClusterSet cs;
    cs.label.assign(n, -1);
    std::vector<int> root_id(n, -1);
    for (int v = 0; v < n; ++v) {
        if (phi[v] == 0.0) continue;
        int r = find(v);
        if (root_id[r] < 0) {
            root_id[r] = cs.count();
            cs.members.emplace_back();
            cs.sign.push_back(phi[v] > 0 ? 1 : -1);
        }
        cs.label[v] = root_id[r];
        cs.members[root_id[r]].push_back(v);
    }
    return cs;
}

void group_generations(ClusterSet& cs, const GridDomain& dom) {
    cs.generation.assign(cs.count(), -1);
    std::deque<int> q;
    for (int c = 0; c < cs.count(); ++c)
        for (int v : cs.members[c]) {
            bool touches = false;
            for (int d = 0; d < 4; ++d) touches |= dom.nbr(v, d) < 0;
            if (touches) {
                cs.generation[c] = 0;
                q.push_back(c);
                break;
            }
        }
    while (!q.empty()) {
        int c = q.front();
        q.pop_front();
        for (int v : cs.members[c])
            for (int d = 0; d < 4; ++d) {
                int u = dom.nbr(v, d);
                if (u < 0) continue;
                int c2 = cs.label[u];
                if (c2 >= 0 && cs.generation[c2] < 0) {
                    cs.generation[c2] = cs.generation[c] + 1;
                    q.push_back(c2);
                }
            }
    }
}

}  // namespace wb
