#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aimm/core/mesh.hpp"

namespace aimm {

// Per-node SPD target metric, units 1/length^2: an edge e has unit metric
// length when e' M e = 1, so eigenvalue lambda along a direction asks for
// edges of length 1/sqrt(lambda) there.
struct MetricField {
    std::vector<Sym2> m;
    std::uint64_t gen = 0;
};

// Per-edge interpolation-error indicator (indexed like mesh.edges()) and the
// global error level the adaptation tries to equidistribute.
struct EdgeErrorField {
    std::vector<double> e;
    double target = 0.0;
};

// Second-moment tensor of the edges around a node:
//   X^i = (1/|patch|) sum_j (x_j - x_i) (x_j - x_i)^T
// Positive definite unless the neighbors are colinear with the node.
Sym2 length_distribution_tensor(const TriMesh& m, int node);

// Patch-recovered nodal gradient, exact for fields linear in x and y:
//   G^i = (X^i)^-1 (1/|patch|) sum_j (U_j - U_i)(x_j - x_i)
// X^i is regularized by 1e-12 tr(X) I before inversion; a patch that is
// rank-deficient even then throws DegeneratePatch.
Vec2 recover_gradient(const TriMesh& m, const ScalarField& f, int node);
std::vector<Vec2> recover_gradients(const TriMesh& m, const ScalarField& f);

// e_ij = |(G^j - G^i) . (x_j - x_i)| -- an edgewise second-difference, i.e.
// the size of the quadratic term the linear interpolant misses along the
// edge. `target` is left at zero; build_metric fills it.
EdgeErrorField edge_errors(const TriMesh& m, const ScalarField& f);

// Length of segment a->b in the metric, endpoint tensors averaged.
double metric_edge_length(Vec2 xa, Vec2 xb, const Sym2& Ma, const Sym2& Mb);

// Metric intersection by simultaneous reduction: the result is the smallest
// metric dominating both, i.e. it takes the finer (larger-eigenvalue) request
// in each common eigendirection.
Sym2 metric_intersection(const Sym2& A, const Sym2& B);

struct MetricOpts {
    int target_nodes = 0;       // requested node budget N
    double node_tol = 0.05;     // bisection stops within this fraction of N
    double h_min = 1e-4;        // eigenvalue clamp ceiling 1/h_min^2
    double h_max = 1.0;         // eigenvalue clamp floor 1/h_max^2
    double s_min = 0.25;        // per-pass stretching clamp
    double s_max = 4.0;
    // Alternative stretching law s = e/e_target kept for comparison runs; the
    // default s = sqrt(e_target/e) matches the quadratic growth of the edge
    // error with edge length and equidistributes it.
    bool printed_stretching = false;
};

struct MetricResult {
    MetricField metric;
    double e_target = 0.0;        // error level picked for the last criterion
    double predicted_nodes = 0.0; // node-count estimate for the final metric
    bool target_reached = true;   // false when the s/h clamps block the budget
    std::string warning;
};

// One metric per criterion field (error equidistribution at a bisected error
// level so the predicted node count meets the budget), all intersected, then
// eigenvalue-clamped to [1/h_max^2, 1/h_min^2].
MetricResult build_metric(const TriMesh& m, const std::vector<const ScalarField*>& criteria,
                          const MetricOpts& opts);

}  // namespace aimm
