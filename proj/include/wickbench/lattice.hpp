#pragma once

// Lattice domains with Dirichlet boundary, Green function diagonals and the
// V_A field as a difference of diagonals.

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <nlohmann/json_fwd.hpp>

namespace wb {

enum class Shape { disk, square };

// Interior vertices are integer points (i, j) scaled by h, centered at the
// origin. Every interior vertex has 4 neighbours in interior or boundary.
class GridDomain {
public:
    static GridDomain disk(double R, double h);
    static GridDomain square(double L, double h);
    // Disk of radius 1 with `across` lattice points on a diameter, boundary
    // points included: h = 2 / (across - 1).
    static GridDomain disk_across(int across);

    Shape shape() const { return shape_; }
    double scale() const { return scale_; }  // R for a disk, L for a square
    double h() const { return h_; }
    int n() const { return static_cast<int>(sites_.size()); }
    int half() const { return half_; }

    const std::array<int, 2>& site(int v) const { return sites_[v]; }
    double x(int v) const { return sites_[v][0] * h_; }
    double y(int v) const { return sites_[v][1] * h_; }
    // interior index of lattice point (i, j), or -1
    int index(int i, int j) const;
    // neighbour in direction d (0:+x 1:+y 2:-x 3:-y), -1 if boundary
    int nbr(int v, int d) const { return nbr_[4 * v + d]; }

    // Undirected edges between an interior vertex and a neighbour (interior or
    // boundary). edge(v, d) gives its id; ids are dense in [0, n_edges()).
    int edge(int v, int d) const { return edge_[4 * v + d]; }
    int n_edges() const { return n_edges_; }

    // Closed-form conformal radius, disk only.
    double cr(int v) const;
    double dist_to_boundary(int v) const;
    double area() const { return h_ * h_ * n(); }
    // Vertex nearest to the origin.
    int center() const;

    nlohmann::json descriptor() const;

private:
    GridDomain() = default;
    void build(const std::vector<std::array<int, 2>>& pts);

    Shape shape_ = Shape::disk;
    double scale_ = 1.0, h_ = 1.0;
    int half_ = 0;
    std::vector<std::array<int, 2>> sites_;
    std::vector<int> lookup_;
    std::vector<int> nbr_, edge_;
    int n_edges_ = 0;
};

// Connected components of the vertices with keep[v] != 0 (4-neighbour).
// Returns a label per vertex (-1 where not kept) and the component count.
std::vector<int> label_components(const GridDomain& dom, const std::vector<char>& keep, int& count);

// -Delta restricted to `verts` (global ids), with Dirichlet outside and
// optional extra conductance to ground per global vertex.
Eigen::SparseMatrix<double> dirichlet_laplacian(const GridDomain& dom, const std::vector<int>& verts,
                                                const std::vector<double>* extra = nullptr);

// Diagonal of A^{-1} for a sparse SPD matrix, by selected inversion on
// the sparsity pattern of its LDL^T factor.
std::vector<double> inverse_diagonal(const Eigen::SparseMatrix<double>& A);

// Diagonal of (-Delta)^{-1} with Dirichlet condition on the boundary and on
// `removed`; NaN on removed vertices. `extra` adds conductance to ground.
std::vector<double> green_diag(const GridDomain& dom, const std::vector<char>& removed,
                               const std::vector<double>* extra = nullptr);

// Full-domain Green function: cached diagonal plus a Cholesky factor used
// both for column solves and for sampling.
class GreenTable {
public:
    explicit GreenTable(const GridDomain& dom);
    const GridDomain& domain() const { return dom_; }
    const std::vector<double>& diag() const { return diag_; }
    std::vector<double> column(int w) const;
    double operator()(int z, int w) const;
    // x = L^{-T} xi in the original ordering: Cov(x) = (-Delta)^{-1}
    Eigen::VectorXd correlate(const Eigen::VectorXd& xi) const;

private:
    const GridDomain& dom_;
    std::vector<double> diag_;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

// V_A = G_D - G_{D\A} on interior \ A (NaN on A). With `extra` non-null the
// cut-edge conductances of the metric graph are included in G_{D\A}.
std::vector<double> v_field(const GreenTable& G, const std::vector<char>& inA,
                            const std::vector<double>* extra = nullptr);

// V_A at a single vertex z not in A, with one sparse solve.
double v_at(const GreenTable& G, const std::vector<char>& inA, int z, const std::vector<double>* extra = nullptr);

struct CrCalibration {
    double kappa;         // G_D(z,z) - (1/2 pi) log(CR(z,D)/h), averaged
    double residual_std;  // spread of that difference over the probe window
    int n_probe;
};

// Probe window: vertices with distance to the boundary > R/4, shifted by
// `offset` (in units of R) to test homogeneity.
CrCalibration cr_calibration(const GreenTable& G, std::array<double, 2> offset = {0, 0});

// h^4 sum_{z,w} f(z) K_eta(|z-w|) f(w) for a field on the interior vertices.
double sobolev_norm_sq(const GridDomain& dom, const std::vector<double>& f, double eta);

// Same for several fields sharing one kernel table.
class SobolevNorm {
public:
    SobolevNorm(const GridDomain& dom, double eta);
    double operator()(const std::vector<double>& f) const;

private:
    const GridDomain& dom_;
    int w_;
    std::vector<double> table_;  // kernel by |dx|, |dy|
};

}  // namespace wb
