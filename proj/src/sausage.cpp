#include "wickbench/sausage.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wickbench/gff.hpp"
#include "wickbench/parallel.hpp"
#include "wickbench/polyseq.hpp"
#include "wickbench/special.hpp"

namespace wb {

using std::numbers::pi;

BrownianWalker::BrownianWalker(double M, double dt, std::uint64_t seed, std::uint64_t index)
    : rng_(make_stream(seed, index, StreamTag::brownian)), dt_(dt), sd_(std::sqrt(dt)) {
    if (!(M > 0) || !(dt > 0)) throw std::invalid_argument("BrownianWalker: M and dt must be positive");
    double u = uniform01(rng_);
    zeta_ = -std::log1p(-u) / M;
    n_ = std::max(1L, static_cast<long>(std::ceil(zeta_ / dt_)));
}

BrownianPath sample_killed_bm(double M, double dt, std::uint64_t seed, std::uint64_t index) {
    if (!(M > 0)) throw std::invalid_argument("sample_killed_bm: M must be positive");
    if (!(dt > 0) || dt > 1e-5 / M) throw std::invalid_argument("sample_killed_bm: dt must not exceed 1e-5/M");
    BrownianWalker w(M, dt, seed, index);
    BrownianPath path;
    path.dt = dt;
    path.lifetime = w.lifetime();
    path.points.reserve(w.positions());
    path.weights.reserve(w.positions());
    Point p;
    double wt;
    while (w.next(p, wt)) {
        path.points.push_back(p);
        path.weights.push_back(wt);
    }
    return path;
}

SausageRaster::SausageRaster(double eps, double cell, int sub) : eps_(eps), cell_(cell), sub_(sub) {
    if (!(eps > 0) || !(cell > 0) || sub < 1 || (sub & (sub - 1)))
        throw std::invalid_argument("SausageRaster: bad parameters");
    q_shift_ = 3 + std::countr_zero(static_cast<unsigned>(sub));
    inv_q_ = sub / cell;
    const double r = eps / cell;
    const int nq = 8 * sub_;
    // block range reached by any snapped centre in [0, 8)
    const int lo = static_cast<int>(std::floor((-r - 1) / 8.0)) - 1;
    const int hi = static_cast<int>(std::floor((8 + r) / 8.0)) + 1;
    const int wide = hi - lo + 1;
    std::vector<std::uint64_t> tmp(size_t(nq) * nq * wide * wide, 0);
    int used_lo = hi, used_hi = lo;
    for (int qy = 0; qy < nq; ++qy)
        for (int qx = 0; qx < nq; ++qx) {
            const double fx = (qx + 0.5) / sub_, fy = (qy + 0.5) / sub_;
            auto* m = &tmp[(size_t(qy) * nq + qx) * wide * wide];
            const int k0x = static_cast<int>(std::floor(fx - r - 1)), k1x = static_cast<int>(std::ceil(fx + r + 1));
            const int k0y = static_cast<int>(std::floor(fy - r - 1)), k1y = static_cast<int>(std::ceil(fy + r + 1));
            for (int ky = k0y; ky <= k1y; ++ky)
                for (int kx = k0x; kx <= k1x; ++kx) {
                    double dx = kx + 0.5 - fx, dy = ky + 0.5 - fy;
                    if (dx * dx + dy * dy > r * r) continue;
                    int bx = static_cast<int>(std::floor(kx / 8.0)), by = static_cast<int>(std::floor(ky / 8.0));
                    int lx = kx - 8 * bx, ly = ky - 8 * by;
                    m[(by - lo) * wide + (bx - lo)] |= 1ull << (ly * 8 + lx);
                    used_lo = std::min({used_lo, bx, by});
                    used_hi = std::max({used_hi, bx, by});
                }
        }
    bmin_ = used_lo;
    span_ = used_hi - used_lo + 1;
    masks_.assign(size_t(nq) * nq * span_ * span_, 0);
    for (int q = 0; q < nq * nq; ++q)
        for (int b = 0; b < span_; ++b)
            for (int a = 0; a < span_; ++a)
                masks_[(size_t(q) * span_ + b) * span_ + a] =
                    tmp[size_t(q) * wide * wide + (b + bmin_ - lo) * wide + (a + bmin_ - lo)];
}

std::uint64_t* SausageRaster::block(long bx, long by) {
    const long tx = bx >> kTileShift, ty = by >> kTileShift;
    std::uint64_t key = (std::uint64_t(std::uint32_t(tx)) << 32) | std::uint32_t(ty);
    if (!last_ || key != last_key_) {
        auto& t = tiles_[key];
        if (!t) t = std::make_unique<Tile>();
        last_ = t.get();
        last_key_ = key;
    }
    return &last_->bits[(by - ty * kTile) * kTile + (bx - tx * kTile)];
}

void SausageRaster::add(const Point& p) {
    // quantized centre: nq = 8 sub steps per block, a power of two
    const long ix = static_cast<long>(std::floor(p[0] * inv_q_)), iy = static_cast<long>(std::floor(p[1] * inv_q_));
    const long Bx = ix >> q_shift_, By = iy >> q_shift_;
    const long nq = 1L << q_shift_;
    const std::uint64_t* m = &masks_[size_t((iy & (nq - 1)) * nq + (ix & (nq - 1))) * span_ * span_];
    const long x0 = Bx + bmin_, y0 = By + bmin_;
    // fast path: the whole stamp lies in one tile
    std::uint64_t* base = block(x0, y0);
    const long ox = x0 & (kTile - 1), oy = y0 & (kTile - 1);
    if (ox + span_ <= kTile && oy + span_ <= kTile) {
        for (int b = 0; b < span_; ++b)
            for (int a = 0; a < span_; ++a) base[b * kTile + a] |= m[b * span_ + a];
        return;
    }
    for (int b = 0; b < span_; ++b)
        for (int a = 0; a < span_; ++a) {
            std::uint64_t bits = m[b * span_ + a];
            if (bits) *block(x0 + a, y0 + b) |= bits;
        }
}

double SausageRaster::area() const {
    long c = 0;
    for (auto& [k, t] : tiles_)
        for (auto w : t->bits) c += std::popcount(w);
    return c * cell_ * cell_;
}

double sausage_area(const BrownianPath& path, double eps, double cell) {
    if (!(cell > 0) || eps < 8 * cell * (1 - 1e-12)) throw std::invalid_argument("sausage_area: cell too coarse");
    SausageRaster r(eps, cell);
    for (auto& p : path.points) r.add(p);
    return r.area();
}

std::vector<SausageRatio> sausage_leading(double M, const std::vector<double>& eps, std::uint64_t seed, long first,
                                          long count, int workers, long chunk) {
    if (eps.empty()) throw std::invalid_argument("sausage_leading: empty eps list");
    const double emin = *std::min_element(eps.begin(), eps.end());
    if (!(emin > 0) || !(emin < 1)) throw std::invalid_argument("sausage_leading: eps must lie in (0, 1)");
    const double dt = emin * emin / 16;
    if (dt > 1e-5 / M) throw std::invalid_argument("sausage_leading: eps too large for the resolution guard");
    std::vector<long> stride;
    for (double e : eps) {
        double k = (e / emin) * (e / emin);
        if (std::abs(k - std::round(k)) > 1e-9 * k || !(e < 1))
            throw std::invalid_argument("sausage_leading: (eps / eps_min)^2 must be an integer");
        stride.push_back(std::lround(k));
    }
    const size_t ne = eps.size();
    struct Acc {
        std::vector<MeanAcc> ratio;
        std::vector<double> area;
        double life = 0;
    };
    auto parts = parallel_chunks(count, chunk, workers, [&](long b, long e) {
        Acc acc{std::vector<MeanAcc>(ne), std::vector<double>(ne, 0.0), 0.0};
        for (long i = first + b; i < first + e; ++i) {
            BrownianWalker walker(M, dt, seed, i);
            std::vector<SausageRaster> rasters;
            for (double x : eps) rasters.emplace_back(x, x / 8);
            Point p;
            double wt;
            long k = 0;
            while (walker.next(p, wt)) {
                for (size_t j = 0; j < ne; ++j)
                    if (k % stride[j] == 0) rasters[j].add(p);
                ++k;
            }
            for (size_t j = 0; j < ne; ++j) {
                double a = rasters[j].area();
                acc.ratio[j].add(std::abs(std::log(eps[j])) / pi * a / walker.lifetime());
                acc.area[j] += a;
            }
            acc.life += walker.lifetime();
        }
        return acc;
    });
    std::vector<MeanAcc> ratio(ne);
    std::vector<double> area(ne, 0.0);
    double life = 0;
    for (auto& a : parts) {
        for (size_t j = 0; j < ne; ++j) {
            ratio[j].merge(a.ratio[j]);
            area[j] += a.area[j];
        }
        life += a.life;
    }
    std::vector<SausageRatio> out;
    for (size_t j = 0; j < ne; ++j)
        out.push_back({eps[j], ratio[j].mean(), ratio[j].se(), std::abs(std::log(eps[j])) / pi * area[j] / life});
    return out;
}

double circle_average(const BrownianPath& path, const Point& z, double r, double delta) {
    if (!(r > 0)) throw std::invalid_argument("circle_average: r must be positive");
    if (delta <= 0) delta = r / 10;
    const double lo = (r - delta) * (r - delta), hi = (r + delta) * (r + delta);
    double t = 0;
    for (size_t k = 0; k < path.points.size(); ++k) {
        double dx = path.points[k][0] - z[0], dy = path.points[k][1] - z[1];
        double d2 = dx * dx + dy * dy;
        if (d2 >= lo && d2 <= hi) t += path.weights[k];
    }
    return t / (4 * pi * r * delta);
}

double OccupationGrid::total() const {
    double s = outside;
    for (double t : time) s += t;
    return s;
}

OccupationGrid occupation_grid(const BrownianPath& path, double cell, double half) {
    if (!(cell > 0) || !(half > 0)) throw std::invalid_argument("occupation_grid: bad geometry");
    OccupationGrid g;
    g.cell = cell;
    g.n = static_cast<int>(std::ceil(2 * half / cell));
    g.half = 0.5 * g.n * cell;
    g.time.assign(size_t(g.n) * g.n, 0.0);
    for (size_t k = 0; k < path.points.size(); ++k) {
        long i = static_cast<long>(std::floor((path.points[k][0] + g.half) / cell));
        long j = static_cast<long>(std::floor((path.points[k][1] + g.half) / cell));
        if (i < 0 || j < 0 || i >= g.n || j >= g.n)
            g.outside += path.weights[k];
        else
            g.time[size_t(j) * g.n + i] += path.weights[k];
    }
    return g;
}

std::vector<double> circle_average_field(const OccupationGrid& g, const std::vector<Point>& z, double r, double delta) {
    if (!(r > 0)) throw std::invalid_argument("circle_average_field: r must be positive");
    if (delta <= 0) delta = r / 10;
    const double lo = (r - delta) * (r - delta), hi = (r + delta) * (r + delta);
    std::vector<double> out;
    for (auto& p : z) {
        int i0 = std::max(0, static_cast<int>(std::floor((p[0] - r - delta + g.half) / g.cell)));
        int i1 = std::min(g.n - 1, static_cast<int>(std::floor((p[0] + r + delta + g.half) / g.cell)));
        int j0 = std::max(0, static_cast<int>(std::floor((p[1] - r - delta + g.half) / g.cell)));
        int j1 = std::min(g.n - 1, static_cast<int>(std::floor((p[1] + r + delta + g.half) / g.cell)));
        double t = 0;
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                auto c = g.center(i, j);
                double d2 = (c[0] - p[0]) * (c[0] - p[0]) + (c[1] - p[1]) * (c[1] - p[1]);
                if (d2 >= lo && d2 <= hi) t += g.time[size_t(j) * g.n + i];
            }
        out.push_back(t / (4 * pi * r * delta));
    }
    return out;
}

namespace {
std::vector<double> renorm_from(const std::vector<double>& theta, int n, double r, double M) {
    if (n < 1) throw std::invalid_argument("renorm_loctime: n must be >= 1");
    BiPolyEval lam(laguerre_lambda(n));
    const double h = massive_green(M, r);
    std::vector<double> out;
    for (double t : theta) out.push_back(lam(t, h));
    return out;
}
}  // namespace

std::vector<double> renorm_loctime(const OccupationGrid& g, int n, double r, double M, const std::vector<Point>& z) {
    return renorm_from(circle_average_field(g, z, r), n, r, M);
}

std::vector<double> renorm_loctime(const BrownianPath& path, int n, double r, double M, const std::vector<Point>& z) {
    std::vector<double> theta;
    for (auto& p : z) theta.push_back(circle_average(path, p, r));
    return renorm_from(theta, n, r, M);
}

namespace {

double cell_two_point(double M, const Point& z, const Point& w, double c) {
    using GL = boost::math::quadrature::gauss<double, 8>;
    auto G = [&](double dx, double dy) { return massive_green(M, std::hypot(dx, dy)); };
    double h = c / 2;
    double total = GL::integrate(
        [&](double x1) {
            return GL::integrate(
                [&](double y1) {
                    return GL::integrate(
                        [&](double x2) {
                            return GL::integrate(
                                [&](double y2) {
                                    double ax = z[0] + x1, ay = z[1] + y1, bx = w[0] + x2, by = w[1] + y2;
                                    return (G(ax, ay) + G(bx, by)) * G(ax - bx, ay - by);
                                },
                                -h, h);
                        },
                        -h, h);
                },
                -h, h);
        },
        -h, h);
    return total / (c * c * c * c);
}

}  // namespace

std::vector<TwoPointStat> two_point_check(double M, const std::vector<std::pair<Point, Point>>& pairs, double dt,
                                          double cell, std::uint64_t seed, long first, long count, int workers,
                                          long chunk) {
    for (auto& [z, w] : pairs) {
        double sep = std::max(std::abs(z[0] - w[0]), std::abs(z[1] - w[1]));
        double oz = std::max(std::abs(z[0]), std::abs(z[1])), ow = std::max(std::abs(w[0]), std::abs(w[1]));
        if (sep < 1.5 * cell || oz < 1.5 * cell || ow < 1.5 * cell)
            throw std::invalid_argument("two_point_check: coincident points");
    }
    if (dt > 1e-5 / M) throw std::invalid_argument("two_point_check: dt must not exceed 1e-5/M");
    const size_t np = pairs.size();
    std::vector<Point> cells;
    for (auto& [z, w] : pairs) {
        cells.push_back(z);
        cells.push_back(w);
    }
    double bx0 = 1e300, bx1 = -1e300, by0 = 1e300, by1 = -1e300;
    for (auto& c : cells) {
        bx0 = std::min(bx0, c[0] - cell / 2);
        bx1 = std::max(bx1, c[0] + cell / 2);
        by0 = std::min(by0, c[1] - cell / 2);
        by1 = std::max(by1, c[1] + cell / 2);
    }
    struct Acc {
        std::vector<double> s, s2;
    };
    auto parts = parallel_chunks(count, chunk, workers, [&](long b, long e) {
        Acc acc{std::vector<double>(np, 0.0), std::vector<double>(np, 0.0)};
        std::vector<double> occ(cells.size());
        for (long i = first + b; i < first + e; ++i) {
            std::fill(occ.begin(), occ.end(), 0.0);
            BrownianWalker walker(M, dt, seed, i);
            Point p;
            double wt;
            while (walker.next(p, wt)) {
                if (p[0] < bx0 || p[0] > bx1 || p[1] < by0 || p[1] > by1) continue;
                for (size_t c = 0; c < cells.size(); ++c)
                    if (std::abs(p[0] - cells[c][0]) < cell / 2 && std::abs(p[1] - cells[c][1]) < cell / 2) occ[c] += wt;
            }
            for (size_t k = 0; k < np; ++k) {
                double x = occ[2 * k] * occ[2 * k + 1] / std::pow(cell, 4);
                acc.s[k] += x;
                acc.s2[k] += x * x;
            }
        }
        return acc;
    });
    std::vector<double> s(np, 0.0), s2(np, 0.0);
    for (auto& a : parts)
        for (size_t k = 0; k < np; ++k) {
            s[k] += a.s[k];
            s2[k] += a.s2[k];
        }
    std::vector<TwoPointStat> out;
    for (size_t k = 0; k < np; ++k) {
        auto [z, w] = pairs[k];
        double m = s[k] / count;
        double var = count > 1 ? std::max(0.0, (s2[k] - count * m * m) / (count - 1)) : 0.0;
        double gz = massive_green(M, std::hypot(z[0], z[1])), gw = massive_green(M, std::hypot(w[0], w[1]));
        double gzw = massive_green(M, std::hypot(z[0] - w[0], z[1] - w[1]));
        out.push_back({z, w, m, std::sqrt(var / count), cell_two_point(M, z, w, cell), (gz + gw) * gzw});
    }
    return out;
}

double mass_change_check(double x, double u1, double u2, int n) {
    if (n < 1) throw std::invalid_argument("mass_change_check: n must be >= 1");
    const BiPoly ln = laguerre_lambda(n);
    double lhs = BiPolyEval(ln)(x, u2);
    double rhs = 0.0, scale = std::abs(lhs);
    for (int k = 1; k <= n; ++k) {
        double c = static_cast<double>(ln.coeff({k, n - k}));
        double term = c * std::pow(u2 - u1, n - k) * BiPolyEval(laguerre_lambda(k))(x, u1);
        rhs += term;
        scale += std::abs(term);
    }
    return std::abs(lhs - rhs) / std::max(1.0, scale);
}

}  // namespace wb
