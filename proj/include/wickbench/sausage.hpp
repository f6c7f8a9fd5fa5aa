#pragma once

// Killed planar Brownian motion (generator Delta/2, killing rate M), Wiener
// sausage areas, occupation and circle-average fields, and the Laguerre
// renormalization of multiple points.

#include <array>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "wickbench/rng.hpp"

namespace wb {

using Point = std::array<double, 2>;

// Streams the positions B_0 = 0, B_dt, ... up to the killing time. Each
// position carries dt of occupation time, the last one the remainder.
class BrownianWalker {
public:
    BrownianWalker(double M, double dt, std::uint64_t seed, std::uint64_t index);
    double lifetime() const { return zeta_; }
    long positions() const { return n_; }
    // Next position and its time weight; false once exhausted.
    bool next(Point& p, double& weight) {
        if (k_ >= n_) return false;
        if (k_ > 0) {
            cur_[0] += sd_ * normal_(rng_);
            cur_[1] += sd_ * normal_(rng_);
        }
        p = cur_;
        weight = k_ + 1 < n_ ? dt_ : zeta_ - (n_ - 1) * dt_;
        ++k_;
        return true;
    }

private:
    Rng rng_;
    Normal normal_;
    double dt_, sd_, zeta_;
    long n_, k_ = 0;
    Point cur_{0.0, 0.0};
};

struct BrownianPath {
    double dt = 0, lifetime = 0;
    std::vector<Point> points;
    std::vector<double> weights;   // occupation time per point, sums to lifetime
};

// Requires dt <= 1e-5 / M.
BrownianPath sample_killed_bm(double M, double dt, std::uint64_t seed, std::uint64_t index);

// Rasterized union of closed disks of radius eps around added points. Cells
// are grouped in 8x8 blocks stored as bit masks inside sparse tiles; disk
// centres are snapped to 1/sub of a cell (sub a power of two).
class SausageRaster {
public:
    SausageRaster(double eps, double cell, int sub = 4);
    void add(const Point& p);
    double area() const;
    double eps() const { return eps_; }
    double cell() const { return cell_; }

private:
    static constexpr int kTileShift = 6;
    static constexpr int kTile = 1 << kTileShift;   // blocks per tile side
    struct Tile {
        std::vector<std::uint64_t> bits = std::vector<std::uint64_t>(kTile * kTile, 0);
    };
    std::uint64_t* block(long bx, long by);

    double eps_, cell_;
    int sub_, span_, bmin_, q_shift_;
    double inv_q_;
    std::vector<std::uint64_t> masks_;   // per snapped offset: span x span blocks
    std::unordered_map<std::uint64_t, std::unique_ptr<Tile>> tiles_;
    std::uint64_t last_key_ = ~0ull;
    Tile* last_ = nullptr;
};

// Requires eps >= 8 cell.
double sausage_area(const BrownianPath& path, double eps, double cell);

// (1/(4 pi r delta)) times the time spent in the annulus r - delta <= |x - z| <= r + delta.
double circle_average(const BrownianPath& path, const Point& z, double r, double delta = -1);

// Occupation time per square cell on [-half, half]^2; time outside is kept apart.
struct OccupationGrid {
    double cell = 0, half = 0;
    int n = 0;   // cells per side
    std::vector<double> time;
    double outside = 0;
    double total() const;
    Point center(int i, int j) const { return {-half + (i + 0.5) * cell, -half + (j + 0.5) * cell}; }
};
OccupationGrid occupation_grid(const BrownianPath& path, double cell, double half);

struct SausageRatio {
    double eps;
    double mean, se;        // of (1/pi)|log eps| area / lifetime, per path
    double ratio_of_means;  // (1/pi)|log eps| E[area] / E[lifetime]
};
// Leading-order sausage ratios over paths [first, first + count). One path
// serves every eps: it is sampled with dt = eps_min^2 / 16 and the coarser
// sausages stamp every k-th point, k = (eps / eps_min)^2 (must be an integer).
// Cells are eps / 8.
std::vector<SausageRatio> sausage_leading(double M, const std::vector<double>& eps, std::uint64_t seed, long first,
                                          long count, int workers = 1, long chunk = 8);

// Circle averages at the points z from a gridded occupation measure.
std::vector<double> circle_average_field(const OccupationGrid& g, const std::vector<Point>& z, double r,
                                         double delta = -1);

// Lambda_n(Theta_r(z), h_M(r)) at each z.
std::vector<double> renorm_loctime(const OccupationGrid& g, int n, double r, double M, const std::vector<Point>& z);
std::vector<double> renorm_loctime(const BrownianPath& path, int n, double r, double M, const std::vector<Point>& z);

struct TwoPointStat {
    Point z, w;
    double empirical, se;
    double theoretical;        // cell-averaged occupation two-point function
    double theoretical_point;  // (G_M(0,z) + G_M(0,w)) G_M(z,w)
    double z_score() const { return se > 0 ? (empirical - theoretical) / se : 0.0; }
};
// E[Theta(cell_z) Theta(cell_w)] / cell^4 over paths [first, first + count).
std::vector<TwoPointStat> two_point_check(double M, const std::vector<std::pair<Point, Point>>& pairs, double dt,
                                          double cell, std::uint64_t seed, long first, long count, int workers = 1,
                                          long chunk = 64);

// Relative residual of Lambda_n(x,u2) = sum_k c_{n,k} (u2-u1)^{n-k} Lambda_k(x,u1).
double mass_change_check(double x, double u1, double u2, int n);

}  // namespace wb
