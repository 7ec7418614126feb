#pragma once

#include <string>

#include "aimm/adapt/metric.hpp"

namespace aimm {

struct RemeshOpts {
    int max_sweeps = 10;
    // Edge-length band, measured in the metric. An edge at its ideal length
    // measures 1; the thresholds are symmetric about that in log scale.
    double split_above = 1.4142135623730951;     // sqrt(2)
    double collapse_below = 0.7071067811865476;  // 1/sqrt(2)
    // Floor on the worst metric shape quality of the result. Falling below
    // it sets `stalled` and a warning, never an exception.
    double min_quality = 0.02;
    bool smooth = true;
    // Optional node budget. Where strong grading keeps element quality below
    // 1 the band fixed point packs more (slightly short) edges than the
    // metric's ideal unit mesh; with a positive target the remesher then
    // collapses the globally shortest metric edges until the count is within
    // `budget_slack` of the target. It only ever trims sub-unit edges, so it
    // cannot coarsen past the metric itself, and it cannot fix undershoot.
    int target_nodes = 0;
    double budget_slack = 0.02;
};

struct RemeshResult {
    TriMesh mesh;
    int sweeps = 0;
    long splits = 0;
    long collapses = 0;
    long flips = 0;
    double min_quality = 0.0;
    double max_quality = 0.0;
    bool stalled = false;
    std::string warning;
};

// Shape quality of a triangle in the metric: 4*sqrt(3)*area_M / (sum of
// squared metric edge lengths), where area_M scales the Euclidean area by
// sqrt(det) of the vertex-averaged metric. Equilateral in the metric -> 1,
// degenerate -> 0.
double metric_quality(Vec2 a, Vec2 b, Vec2 c, const Sym2& Ma, const Sym2& Mb,
                      const Sym2& Mc);

// Local remeshing toward unit metric edge lengths. Each sweep smooths
// interior nodes with a metric-weighted Laplacian (from the second sweep on),
// then alternates two phases to a joint fixed point: split every edge longer
// than `split_above` (longest first, midpoint insertion) and collapse edges
// shorter than `collapse_below` (shortest first; boundary nodes survive
// interior ones, boundary-boundary collapses only along straight same-tag
// boundary runs, and a link-condition plus element-inversion check guards
// topology); finally it flips interior diagonals when that strictly raises
// the worse shape quality of the adjacent pair. The mesh is rebuilt (and
// thereby fully re-validated) after every sweep; metric values for new or
// moved nodes are interpolated on the input mesh. Stops once a sweep changes
// nothing, or when the node count has been stable for two sweeps and only
// smoothing-induced churn remains.
RemeshResult remesh_to_metric(const TriMesh& m, const MetricField& metric,
                              const RemeshOpts& opts = {});

// Nodewise transfer onto a different mesh: locate + linear interpolation,
// with points marginally outside the donor snapped to the nearest boundary
// point when within one local mesh size. Throws TransferMiss otherwise.
ScalarField transfer_field(const TriMesh& from, const ScalarField& f,
                           const TriMesh& to);
VectorField transfer_field(const TriMesh& from, const VectorField& f,
                           const TriMesh& to);

// Appends one row per adaptation event (header written when the file is
// new/empty): step, time, node/tri counts, per-phase operation totals and
// the final quality range.
void append_adapt_stats_csv(const std::string& path, int step, double time,
                            const RemeshResult& r);

}  // namespace aimm
