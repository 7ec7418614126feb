#pragma once

#include <array>
#include <string>
#include <vector>

#include "aimm/core/mesh.hpp"
#include "aimm/solid/solid.hpp"

namespace aimm {

// Oriented chain of segments describing the wetted boundary of the immersed
// body in its current configuration. Travel direction is counter-clockwise
// around the body, so each segment normal -- travel rotated -90 degrees --
// points away from the body, into the surrounding fluid.
struct InterfacePolyline {
    std::vector<Vec2> pts;  // chain vertices in order
    bool closed = true;     // last vertex connects back to the first
    // per segment i (pts[i] -> pts[i+1], wrapping when closed):
    std::vector<int> seg_tags;                  // originating boundary tag
    std::vector<std::array<int, 2>> seg_nodes;  // source mesh nodes, {-1,-1} if synthetic

    int n_segments() const {
        int n = static_cast<int>(pts.size());
        return closed ? n : std::max(0, n - 1);
    }
    Vec2 a(int i) const { return pts[i]; }
    Vec2 b(int i) const { return pts[(i + 1) % pts.size()]; }
    double seg_length(int i) const { return (b(i) - a(i)).norm(); }
    Vec2 normal(int i) const;  // unit
    double length() const;     // total arc length

    // Uniform-tag chain without source-mesh bookkeeping (tests, probes).
    static InterfacePolyline from_points(std::vector<Vec2> pts, bool closed, int tag = 0);

    // Throws DegeneratePolyline on a zero-length segment, Error on size
    // mismatches or a chain too short to define any segment.
    void validate() const;
};

// Nodal signed distance to the interface, positive on the fluid side,
// negative inside the body, magnitude clamped to the truncation distance E.
struct LevelSet {
    ScalarField alpha;
    double E = 0.0;
};

// Exact distance to the nearest segment; sign from the nearest feature's
// normal (angle-bisector pseudo-normal at shared vertices). Values within
// 1e-12 x polyline bbox diagonal of the chain snap to exactly zero. The
// default path accelerates the nearest-segment search with a uniform bin
// grid; the brute-force path scans every segment. Both pick the same nearest
// feature (lowest segment index on ties) and produce bit-identical fields.
LevelSet signed_distance(const TriMesh& mesh, const InterfacePolyline& poly, double E);
LevelSet signed_distance_brute(const TriMesh& mesh, const InterfacePolyline& poly, double E);

// 10 x the mean altitude of the mesh elements holding the polyline vertices
// (falls back to the whole-mesh mean when the chain lies outside the mesh).
double default_truncation(const TriMesh& mesh, const InterfacePolyline& poly);

// Boundary loop of the solid in its current configuration. The solid mesh
// orientation puts the domain on the left of each boundary edge, so the walk
// is counter-clockwise and normals point out of the solid. Throws Error if
// the boundary is not a single closed loop.
InterfacePolyline extract_polyline(const SolidState& s);

// Debug dump, one row per segment: x0,y0,x1,y1,nx,ny,tag.
void write_polyline_csv(const std::string& path, const InterfacePolyline& poly);

}  // namespace aimm
