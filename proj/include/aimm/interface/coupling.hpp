#pragma once

#include <set>
#include <span>
#include <utility>
#include <vector>

#include "aimm/fluid/fluid.hpp"
#include "aimm/interface/levelset.hpp"
#include "aimm/solid/solid.hpp"

namespace aimm {

// One velocity constraint per fluid-mesh node inside the body (alpha <= 0):
// the solid velocity interpolated at the node location. Nodes that fall just
// outside the solid mesh (within one local fluid mesh size) take the value at
// the nearest solid boundary point; beyond that throws TransferMiss, which
// signals a level-set / solid-mesh inconsistency.
std::vector<std::pair<int, Vec2>> velocity_continuity(const TriMesh& fluid_mesh,
                                                      const LevelSet& ls,
                                                      const SolidState& solid);

// Convenience: replaces bcs.immersed with the constraints above.
void impose_velocity_continuity(FluidBCs& bcs, const TriMesh& fluid_mesh, const LevelSet& ls,
                                const SolidState& solid);

// Fluid traction sampled at one interface quadrature point.
struct TractionSample {
    int seg = -1;   // polyline segment
    double s = 0;   // parameter along the segment, in (0,1)
    Vec2 x;         // sample location
    Vec2 t;         // traction (2 mu eps(v) - p I) n, n pointing into the fluid
    double w = 0;   // quadrature weight x segment length
};

// Two Gauss points per segment. Pressure is interpolated at the sample point;
// the velocity gradient is taken from the element found a short step along
// the fluid-side normal (0.1 x local element size), keeping the shear sample
// away from the constrained region inside the body. Segments whose tag is in
// exclude_tags (e.g. a clamped edge buried in a wall) are skipped.
std::vector<TractionSample> extract_traction(const FluidState& fs, const FluidMaterial& mat,
                                             const InterfacePolyline& poly,
                                             const std::set<int>& exclude_tags = {});

// Scatter samples onto solid boundary nodes as point loads: each sample adds
// w * t weighted by the linear edge shape functions. The polyline must carry
// source-node ids (it came from extract_polyline).
std::vector<Vec2> traction_nodal_loads(int n_solid_nodes, const InterfacePolyline& poly,
                                       std::span<const TractionSample> samples);

// Net force represented by the samples (the fluid's push on the body). The
// sum of the nodal loads above equals this by construction; together they
// give the discrete action-reaction check.
Vec2 total_sample_force(std::span<const TractionSample> samples);

}  // namespace aimm
