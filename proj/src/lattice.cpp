#include "wickbench/lattice.hpp"

#include <algorithm>
#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "wickbench/special.hpp"

namespace wb {

namespace {
constexpr int DX[4] = {1, 0, -1, 0};
constexpr int DY[4] = {0, 1, 0, -1};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
using SpMat = Eigen::SparseMatrix<double>;
}  // namespace

GridDomain GridDomain::disk(double R, double h) {
    if (!(R > 0) || !(h > 0)) throw std::invalid_argument("disk: R and h must be positive");
    GridDomain d;
    d.shape_ = Shape::disk;
    d.scale_ = R;
    d.h_ = h;
    const double rr = (R / h) * (R / h) * (1 - 1e-12);
    const int m = static_cast<int>(std::ceil(R / h));
    std::vector<std::array<int, 2>> pts;
    for (int j = -m; j <= m; ++j)
        for (int i = -m; i <= m; ++i)
            if (double(i) * i + double(j) * j < rr) pts.push_back({i, j});
    d.build(pts);
    return d;
}

GridDomain GridDomain::square(double L, double h) {
    if (!(L > 0) || !(h > 0)) throw std::invalid_argument("square: L and h must be positive");
    double k = L / (2 * h);
    int ki = static_cast<int>(std::lround(k));
    if (std::abs(k - ki) > 1e-9) throw std::invalid_argument("square: L/(2h) must be an integer");
    GridDomain d;
    d.shape_ = Shape::square;
    d.scale_ = L;
    d.h_ = h;
    std::vector<std::array<int, 2>> pts;
    for (int j = -ki + 1; j <= ki - 1; ++j)
        for (int i = -ki + 1; i <= ki - 1; ++i) pts.push_back({i, j});
    d.build(pts);
    return d;
}

GridDomain GridDomain::disk_across(int across) {
    if (across < 5) throw std::invalid_argument("disk_across: too few points");
    return disk(1.0, 2.0 / (across - 1));
}

void GridDomain::build(const std::vector<std::array<int, 2>>& pts) {
    if (pts.size() < 9) throw std::invalid_argument("degenerate mesh: fewer than 9 interior vertices");
    sites_ = pts;
    half_ = 0;
    for (auto& p : pts) half_ = std::max({half_, std::abs(p[0]), std::abs(p[1])});
    half_ += 1;
    const int w = 2 * half_ + 1;
    lookup_.assign(size_t(w) * w, -1);
    for (int v = 0; v < n(); ++v) lookup_[size_t(sites_[v][1] + half_) * w + sites_[v][0] + half_] = v;
    nbr_.assign(4 * n(), -1);
    for (int v = 0; v < n(); ++v)
        for (int d = 0; d < 4; ++d) nbr_[4 * v + d] = index(sites_[v][0] + DX[d], sites_[v][1] + DY[d]);
    edge_.assign(4 * n(), -1);
    n_edges_ = 0;
    for (int v = 0; v < n(); ++v)
        for (int d = 0; d < 2; ++d) {
            int id = n_edges_++;
            edge_[4 * v + d] = id;
            int u = nbr_[4 * v + d];
            if (u >= 0) edge_[4 * u + d + 2] = id;
        }
    for (int v = 0; v < n(); ++v)
        for (int d = 2; d < 4; ++d)
            if (nbr_[4 * v + d] < 0) edge_[4 * v + d] = n_edges_++;
}

int GridDomain::index(int i, int j) const {
    if (std::abs(i) > half_ || std::abs(j) > half_) return -1;
    const int w = 2 * half_ + 1;
    return lookup_[size_t(j + half_) * w + i + half_];
}

double GridDomain::cr(int v) const {
    if (shape_ != Shape::disk) throw std::logic_error("conformal radius closed form is only available for disks");
    double r2 = x(v) * x(v) + y(v) * y(v);
    return (scale_ * scale_ - r2) / scale_;
}

double GridDomain::dist_to_boundary(int v) const {
    if (shape_ == Shape::disk) return scale_ - std::hypot(x(v), y(v));
    return scale_ / 2 - std::max(std::abs(x(v)), std::abs(y(v)));
}

int GridDomain::center() const {
    int c = index(0, 0);
    if (c >= 0) return c;
    int best = 0;
    for (int v = 1; v < n(); ++v)
        if (std::hypot(x(v), y(v)) < std::hypot(x(best), y(best))) best = v;
    return best;
}

nlohmann::json GridDomain::descriptor() const {
    return {{"shape", shape_ == Shape::disk ? "disk" : "square"}, {"R_or_L", scale_}, {"h", h_}, {"n_interior", n()}};
}

std::vector<int> label_components(const GridDomain& dom, const std::vector<char>& keep, int& count) {
    std::vector<int> label(dom.n(), -1), stack;
    count = 0;
    for (int s = 0; s < dom.n(); ++s) {
        if (!keep[s] || label[s] >= 0) continue;
        label[s] = count;
        stack.push_back(s);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int d = 0; d < 4; ++d) {
                int u = dom.nbr(v, d);
                if (u >= 0 && keep[u] && label[u] < 0) {
                    label[u] = count;
                    stack.push_back(u);
                }
            }
        }
        ++count;
    }
    return label;
}

namespace {

SpMat laplacian_local(const GridDomain& dom, const std::vector<int>& verts, std::vector<int>& local,
                      const std::vector<double>* extra) {
    const int m = static_cast<int>(verts.size());
    for (int a = 0; a < m; ++a) local[verts[a]] = a;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size_t(5) * m);
    for (int a = 0; a < m; ++a) {
        int v = verts[a];
        double diag = 4.0 + (extra ? (*extra)[v] : 0.0);
        trip.emplace_back(a, a, diag);
        for (int d = 0; d < 4; ++d) {
            int u = dom.nbr(v, d);
            if (u >= 0 && local[u] >= 0) trip.emplace_back(a, local[u], -1.0);
        }
    }
    SpMat A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
    for (int v : verts) local[v] = -1;
    return A;
}

}  // namespace

SpMat dirichlet_laplacian(const GridDomain& dom, const std::vector<int>& verts, const std::vector<double>* extra) {
    std::vector<int> local(dom.n(), -1);
    return laplacian_local(dom, verts, local, extra);
}

std::vector<double> inverse_diagonal(const SpMat& A) {
    const int n = static_cast<int>(A.rows());
    std::vector<double> out(n);
    if (n <= 48) {
        Eigen::MatrixXd Ad(A);
        Eigen::MatrixXd inv = Ad.llt().solve(Eigen::MatrixXd::Identity(n, n));
        for (int i = 0; i < n; ++i) out[i] = inv(i, i);
        return out;
    }
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("inverse_diagonal: factorization failed");
    // Strictly lower unit factor, column-major with ascending rows per column.
    const SpMat& L = ldlt.matrixL().nestedExpression();
    const int* Lp = L.outerIndexPtr();
    const int* Li = L.innerIndexPtr();
    const double* Lx = L.valuePtr();
    const Eigen::VectorXd D = ldlt.vectorD();
    std::vector<double> Z(L.nonZeros()), Zd(n), acc;
    for (int j = n - 1; j >= 0; --j) {
        const int p0 = Lp[j], len = Lp[j + 1] - p0;
        acc.assign(len, 0.0);
        for (int a = 0; a < len; ++a) {
            const int i = Li[p0 + a];
            acc[a] += Lx[p0 + a] * Zd[i];
            // Z(k, i) for the rows k > i of column j, found in column i.
            int q = Lp[i];
            const int qe = Lp[i + 1];
            int b = a + 1;
            while (q < qe && b < len) {
                const int r = Li[q], k = Li[p0 + b];
                if (r < k) {
                    ++q;
                } else if (r > k) {
                    ++b;
                } else {
                    acc[a] += Lx[p0 + b] * Z[q];
                    acc[b] += Lx[p0 + a] * Z[q];
                    ++q;
                    ++b;
                }
            }
        }
        double s = 0.0;
        for (int a = 0; a < len; ++a) {
            Z[p0 + a] = -acc[a];
            s += Lx[p0 + a] * Z[p0 + a];
        }
        Zd[j] = 1.0 / D[j] - s;
    }
    const auto& perm = ldlt.permutationP().indices();
    for (int o = 0; o < n; ++o) out[o] = Zd[perm[o]];
    return out;
}

std::vector<double> green_diag(const GridDomain& dom, const std::vector<char>& removed,
                               const std::vector<double>* extra) {
    std::vector<char> keep(dom.n());
    for (int v = 0; v < dom.n(); ++v) keep[v] = !removed[v];
    int ncomp = 0;
    auto label = label_components(dom, keep, ncomp);
    if (ncomp == 0) throw std::invalid_argument("green_diag: nothing left after removal");
    std::vector<std::vector<int>> comps(ncomp);
    for (int v = 0; v < dom.n(); ++v)
        if (label[v] >= 0) comps[label[v]].push_back(v);
    std::vector<double> out(dom.n(), kNaN);
    std::vector<int> local(dom.n(), -1);
    for (auto& c : comps) {
        if (c.size() == 1) {
            out[c[0]] = 1.0 / (4.0 + (extra ? (*extra)[c[0]] : 0.0));
            continue;
        }
        auto d = inverse_diagonal(laplacian_local(dom, c, local, extra));
        for (size_t a = 0; a < c.size(); ++a) out[c[a]] = d[a];
    }
    return out;
}

GreenTable::GreenTable(const GridDomain& dom) : dom_(dom) {
    std::vector<int> all(dom.n());
    std::iota(all.begin(), all.end(), 0);
    SpMat A = dirichlet_laplacian(dom, all);
    llt_.compute(A);
    if (llt_.info() != Eigen::Success) throw std::runtime_error("GreenTable: factorization failed");
    diag_ = inverse_diagonal(A);
}

std::vector<double> GreenTable::column(int w) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dom_.n());
    e[w] = 1.0;
    Eigen::VectorXd x = llt_.solve(e);
    return std::vector<double>(x.data(), x.data() + x.size());
}

double GreenTable::operator()(int z, int w) const {
    if (z == w) return diag_[z];
    return column(w)[z];
}

Eigen::VectorXd GreenTable::correlate(const Eigen::VectorXd& xi) const {
    Eigen::VectorXd y = llt_.matrixU().solve(xi);
    return llt_.permutationPinv() * y;
}

std::vector<double> v_field(const GreenTable& G, const std::vector<char>& inA, const std::vector<double>* extra) {
    auto gA = green_diag(G.domain(), inA, extra);
    std::vector<double> V(gA.size(), kNaN);
    for (size_t v = 0; v < V.size(); ++v)
        if (!inA[v]) V[v] = G.diag()[v] - gA[v];
    return V;
}

double v_at(const GreenTable& G, const std::vector<char>& inA, int z, const std::vector<double>* extra) {
    const GridDomain& dom = G.domain();
    if (inA[z]) throw std::invalid_argument("v_at: vertex lies in A");
    // component of z
    std::vector<char> seen(dom.n(), 0);
    std::vector<int> comp{z}, stack{z};
    seen[z] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int d = 0; d < 4; ++d) {
            int u = dom.nbr(v, d);
            if (u >= 0 && !inA[u] && !seen[u]) {
                seen[u] = 1;
                comp.push_back(u);
                stack.push_back(u);
            }
        }
    }
    SpMat A = dirichlet_laplacian(dom, comp, extra);
    if (comp.size() <= 48) return G.diag()[z] - inverse_diagonal(A)[0];
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("v_at: factorization failed");
    // e^T A^{-1} e = |D^{-1/2} L^{-1} P e|^2 with z at local index 0
    Eigen::VectorXd e = Eigen::VectorXd::Zero(A.rows());
    e[0] = 1.0;
    Eigen::VectorXd y = ldlt.permutationP() * e;
    ldlt.matrixL().solveInPlace(y);
    double g = (y.array().square() / ldlt.vectorD().array()).sum();
    return G.diag()[z] - g;
}

CrCalibration cr_calibration(const GreenTable& G, std::array<double, 2> offset) {
    const GridDomain& dom = G.domain();
    if (dom.shape() != Shape::disk) throw std::invalid_argument("cr_calibration: disk domains only");
    const double R = dom.scale();
    const double cx = offset[0] * R, cy = offset[1] * R;
    const double rad = (0.75 - std::hypot(offset[0], offset[1])) * R;
    if (rad <= 0) throw std::invalid_argument("cr_calibration: offset leaves no probe window");
    std::vector<double> d;
    for (int v = 0; v < dom.n(); ++v)
        if (std::hypot(dom.x(v) - cx, dom.y(v) - cy) < rad)
            d.push_back(G.diag()[v] - std::log(dom.cr(v) / dom.h()) / (2 * std::numbers::pi));
    double mean = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (d.size() - 1)), static_cast<int>(d.size())};
}

namespace {

// Density of the distance between two independent uniform points of the
// unit square.
double square_distance_density(double r) {
    using std::numbers::pi;
    if (r <= 1) return 2 * r * (r * r - 4 * r + pi);
    if (r * r >= 2) return 0.0;
    return 2 * r * (4 * std::sqrt(r * r - 1) - (r * r + 2 - pi) - 4 * std::acos(1 / r));
}

// (1/h^4) times the integral of K_eta(|x - y|) over a pair of identical cells.
double cell_self_average(double eta, double h) {
    boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [&](double r) { return r > 0 ? bessel_potential(eta, h * r) * square_distance_density(r) : 0.0; };
    return ts.integrate(f, 0.0, 1.0) + ts.integrate(f, 1.0, std::sqrt(2.0));
}

}  // namespace

SobolevNorm::SobolevNorm(const GridDomain& dom, double eta) : dom_(dom) {
    if (!(eta > 0)) throw std::invalid_argument("sobolev_norm_sq: eta must be positive");
    w_ = 2 * dom.half() + 1;
    table_.assign(size_t(w_) * w_, 0.0);
    for (int dy = 0; dy < w_; ++dy)
        for (int dx = 0; dx < w_; ++dx)
            if (dx || dy) table_[size_t(dy) * w_ + dx] = bessel_potential(eta, dom.h() * std::hypot(dx, dy));
    table_[0] = eta > 1 ? bessel_potential(eta, 0.0) : cell_self_average(eta, dom.h());
}

double SobolevNorm::operator()(const std::vector<double>& f) const {
    std::vector<int> idx;
    for (int v = 0; v < dom_.n(); ++v)
        if (f[v] != 0.0) idx.push_back(v);
    double s = 0.0;
    for (size_t a = 0; a < idx.size(); ++a) {
        const int va = idx[a];
        const auto& pa = dom_.site(va);
        double row = 0.5 * table_[0] * f[va];
        for (size_t b = a + 1; b < idx.size(); ++b) {
            const auto& pb = dom_.site(idx[b]);
            row += table_[size_t(std::abs(pa[1] - pb[1])) * w_ + std::abs(pa[0] - pb[0])] * f[idx[b]];
        }
        s += 2 * f[va] * row;
    }
    const double h2 = dom_.h() * dom_.h();
    return h2 * h2 * s;
}

double sobolev_norm_sq(const GridDomain& dom, const std::vector<double>& f, double eta) {
    return SobolevNorm(dom, eta)(f);
}

}  // namespace wb
