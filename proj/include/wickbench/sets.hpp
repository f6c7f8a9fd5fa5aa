#pragma once

// First passage sets and sign clusters of the metric-graph GFF built on the
// lattice, plus conformal-radius neighbourhood masks.

#include <cstdint>
#include <functional>
#include <vector>

#include "wickbench/gff.hpp"
#include "wickbench/lattice.hpp"

namespace wb {

// How V_A is computed from an FPS. `vertex` treats A as a plain vertex set;
// `metric` also accounts for the pieces of A that reach into the cut edges
// (a cable of length 1 - s left between a retained vertex and A).
enum class VMode { vertex, metric };

struct FirstPassageSet {
    double level = 0.0;
    std::vector<char> in_a;         // per interior vertex
    std::vector<char> open_edges;   // per edge id
    std::vector<double> extra;      // metric cut-edge conductance per vertex
    std::vector<double> v_values;   // V_A, NaN on A (empty until computed)
    int size() const;
    // h^2 sum_{x in A} (Phi(x) - a)
    double mass(const FieldSample& s, const GridDomain& dom) const;
};

// One uniform per edge from the (seed, index) edge stream. Reusing the same
// uniforms at several levels gives nested sets.
std::vector<double> edge_uniforms(const GridDomain& dom, std::uint64_t seed, std::uint64_t index);

// Bridge over a unit edge from alpha > 0 to beta: probability of touching 0.
double bridge_touch_prob(double alpha, double beta);

// Position in (0,1) of the first zero of that bridge, conditioned on touching,
// obtained by inverting its distribution function at u in (0,1).
double bridge_first_hit(double alpha, double beta, double u);

FirstPassageSet extract_fps(const FieldSample& s, const GridDomain& dom, double a, const std::vector<double>& edge_u);

// Fills fps.v_values.
void compute_v(FirstPassageSet& fps, const GreenTable& G, VMode mode);

// V_A at one vertex (NaN if it lies in A).
double v_at_vertex(const FirstPassageSet& fps, const GreenTable& G, int z, VMode mode);

struct NeighborhoodMask {
    double threshold;           // on V_A, in lattice units
    std::vector<char> mask;     // {z not in A : V_A(z) > threshold}
    std::vector<char> with_a;   // mask union A
    double area(const GridDomain& dom, bool include_a) const;
};

// Threshold units * (1/2pi)|log eps|; units rescales a continuum threshold to
// the lattice.
NeighborhoodMask neighborhood(const FirstPassageSet& fps, double eps, double units = 1.0);
NeighborhoodMask neighborhood_at(const FirstPassageSet& fps, double threshold);

// {z not in A : (1/2pi) log CR(z,D) - V_A(z)/units < (1/2pi) log eps(z)}; disk only.
NeighborhoodMask tilde_neighborhood(const FirstPassageSet& fps, const GridDomain& dom,
                                    const std::function<double(int)>& eps, double units = 1.0);

struct ClusterSet {
    std::vector<int> label;                // cluster id per vertex, -1 if unclustered
    std::vector<std::vector<int>> members;
    std::vector<int> sign;                 // +1 / -1
    std::vector<int> generation;           // filled by group_generations
    int count() const { return static_cast<int>(members.size()); }
};

// Same-sign edges open with probability 1 - exp(-2|Phi(x)||Phi(y)|); edges to
// the boundary (value 0) and across a sign change are closed.
ClusterSet extract_sign_clusters(const FieldSample& s, const GridDomain& dom, const std::vector<double>& edge_u);

// Peeling by lattice adjacency: generation 0 touches the boundary, generation
// g + 1 touches generation g but nothing lower.
void group_generations(ClusterSet& cs, const GridDomain& dom);

}  // namespace wb
