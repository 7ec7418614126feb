#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "aimm/core/errors.hpp"
#include "aimm/core/tensor.hpp"

namespace aimm {

// Area and P1 shape-function gradients of a straight triangle.
// area is signed: positive for counter-clockwise vertex order.
struct TriGeom {
    double area = 0.0;
    std::array<Vec2, 3> grad{};
};

TriGeom tri_geometry(Vec2 p0, Vec2 p1, Vec2 p2);

// Shortest altitude of a triangle: 2*area / longest edge.
double tri_altitude(Vec2 p0, Vec2 p1, Vec2 p2);

// One-ring of a node.
struct Patch {
    std::vector<int> tris;    // incident triangles, sorted
    std::vector<int> nodes;   // ring neighbours (excluding the node itself), sorted
    bool on_boundary = false;
};

// Unique undirected edge, a < b. t1 == -1 on the boundary.
struct MeshEdge {
    int a = -1, b = -1;
    int t0 = -1, t1 = -1;
};

// Point-location result. When the point is outside the mesh (beyond the snap
// tolerance), inside == false and `nearest` is the closest boundary point.
struct Located {
    bool inside = false;
    int tri = -1;
    std::array<double, 3> bary{};
    Vec2 nearest{};
};

// Nodal fields carry the generation stamp of the mesh they were created on;
// interpolation refuses stale fields after a remesh.
struct ScalarField {
    std::vector<double> values;
    std::uint64_t gen = 0;
};

struct VectorField {
    std::vector<Vec2> values;
    std::uint64_t gen = 0;
};

struct TensorField {
    std::vector<Sym2> values;
    std::uint64_t gen = 0;
};

// Immutable linear-triangle mesh with validated connectivity.
//
// Construction runs the full set of sanity checks (positive areas, manifold
// edges, no isolated nodes) and precomputes the adjacency used everywhere
// else: node one-rings, unique edge list, triangle neighbours, and a uniform
// bin grid that seeds the walking point-location.
class TriMesh {
  public:
    using BoundaryTags = std::map<std::pair<int, int>, int>;

    // Empty placeholder so meshes can live in value-type state structs;
    // build() is the only validated construction path.
    TriMesh() = default;

    static TriMesh build(std::vector<Vec2> coords,
                         std::vector<std::array<int, 3>> tris,
                         BoundaryTags boundary_tags = {},
                         std::vector<int> tri_tags = {});

    // Same topology, new node positions (used for deformed configurations
    // and smoothing). Re-validates areas and gets a fresh generation.
    TriMesh with_coords(std::vector<Vec2> coords) const;

    int n_nodes() const { return static_cast<int>(coords_.size()); }
    int n_tris() const { return static_cast<int>(tris_.size()); }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    std::uint64_t generation() const { return gen_; }

    const std::vector<Vec2>& coords() const { return coords_; }
    const std::vector<std::array<int, 3>>& tris() const { return tris_; }
    const std::vector<MeshEdge>& edges() const { return edges_; }
    const std::vector<int>& tri_tags() const { return tri_tags_; }
    const BoundaryTags& boundary_tags() const { return boundary_tags_; }

    Vec2 coord(int n) const { return coords_[n]; }
    const std::array<int, 3>& tri(int t) const { return tris_[t]; }
    double area(int t) const { return geom_[t].area; }
    const std::array<Vec2, 3>& grads(int t) const { return geom_[t].grad; }
    double altitude(int t) const { return altitude_[t]; }
    double total_area() const { return total_area_; }

    // Neighbour triangle across the edge opposite local vertex k, or -1.
    int neighbor(int t, int k) const { return neighbor_[t][k]; }

    bool node_on_boundary(int n) const { return patches_[n].on_boundary; }
    const Patch& patch_of(int n) const;

    // Boundary edges as (node a, node b, tag), ordered so that the domain is
    // on the left of a->b (outward normal = (b-a) rotated -90 degrees).
    struct BEdge {
        int a, b, tag, tri;
    };
    const std::vector<BEdge>& boundary_edges() const { return boundary_edges_; }

    // Walking point location with grid-seeded start and brute-force fallback.
    // Points within snap_tol (1e-10 x bbox diagonal) outside an element are
    // snapped onto it; anything farther out comes back with inside == false
    // and the nearest boundary point.
    Located locate(Vec2 p, int seed_hint = -1) const;

    // P1 evaluation; throws OutsideDomain when the point is not locatable.
    double interpolate(const ScalarField& f, Vec2 p, int seed_hint = -1) const;
    Vec2 interpolate(const VectorField& f, Vec2 p, int seed_hint = -1) const;
    Sym2 interpolate(const TensorField& f, Vec2 p, int seed_hint = -1) const;
    double value_at(const ScalarField& f, const Located& loc) const;
    Vec2 value_at(const VectorField& f, const Located& loc) const;
    Sym2 value_at(const TensorField& f, const Located& loc) const;

    ScalarField make_scalar_field(double init = 0.0) const;
    VectorField make_vector_field(Vec2 init = {}) const;
    TensorField make_tensor_field(Sym2 init = {}) const;

    Vec2 bbox_min() const { return bbox_min_; }
    Vec2 bbox_max() const { return bbox_max_; }
    double snap_tol() const { return snap_tol_; }

    // Barycentric coordinates of p in triangle t (may be negative outside).
    std::array<double, 3> barycentric(int t, Vec2 p) const;

    // Closest point on the mesh boundary to p.
    Vec2 nearest_boundary_point(Vec2 p) const;

  private:
    void finalize();  // adjacency, patches, grid
    void check_field(std::uint64_t field_gen, std::size_t n) const;
    int grid_seed(Vec2 p) const;
    int brute_force(Vec2 p, std::array<double, 3>& bary) const;

    std::vector<Vec2> coords_;
    std::vector<std::array<int, 3>> tris_;
    std::vector<int> tri_tags_;
    BoundaryTags boundary_tags_;

    std::vector<TriGeom> geom_;
    std::vector<double> altitude_;
    std::vector<std::array<int, 3>> neighbor_;
    std::vector<MeshEdge> edges_;
    std::vector<Patch> patches_;
    std::vector<BEdge> boundary_edges_;
    double total_area_ = 0.0;

    Vec2 bbox_min_, bbox_max_;
    double snap_tol_ = 0.0;

    // uniform grid of seed triangles for locate()
    int grid_n_ = 0;
    double grid_hx_ = 0.0, grid_hy_ = 0.0;
    std::vector<int> grid_seed_tri_;

    std::uint64_t gen_ = 0;
};

// Structured triangulation of [x0,x1] x [y0,y1] with nx x ny cells, each cell
// split into two triangles. Boundary tags: 1 left, 2 right, 3 bottom, 4 top.
TriMesh structured_rect(double x0, double y0, double x1, double y1, int nx, int ny);

namespace btag {
constexpr int kLeft = 1;
constexpr int kRight = 2;
constexpr int kBottom = 3;
constexpr int kTop = 4;
}  // namespace btag

}  // namespace aimm
