#pragma once

#include <set>
#include <string>
#include <vector>

#include "aimm/driver/config.hpp"
#include "aimm/fluid/fluid.hpp"
#include "aimm/solid/solid.hpp"

namespace aimm {

// Rigid circular obstacle fused to the solid (the flag-behind-a-cylinder
// layout): the wetted interface replaces the solid's clamped edge with the
// complementary circle arc, and fluid nodes inside the disk are pinned to
// zero velocity.
struct RigidDisk {
    bool present = false;
    Vec2 center{};
    double radius = 0.0;
    int splice_tag = 0;    // solid boundary tag the arc replaces
    int arc_tag = 0;       // tag stamped on the synthetic arc segments
    int arc_segments = 0;  // resolution of the synthetic arc
};

// Everything a coupled run needs: geometry, materials, boundary conditions
// and per-case default knobs.
struct CaseDefinition {
    std::string name;
    FluidMaterial fluid_mat{};
    SolidMaterial solid_mat{};
    TriMesh fluid_mesh;  // initial background mesh (adaptation reshapes it)
    TriMesh solid_mesh;  // solid reference mesh
    FluidBCs fluid_bcs;
    SolidBCs solid_bcs;
    std::set<int> traction_exclude;  // solid tags left out of the load exchange
    RigidDisk rigid;
    Vec2 control_point{};  // reference location whose displacement is tracked
    CouplingConfig defaults;
};

// Built-in case library:
//   bending_beam_1    slender elastic beam across a wide channel
//   plate_vibration   thin plate in a pulsating narrow channel
//   turek_fsi2        flag behind a cylinder, soft regime
//   turek_fsi3        flag behind a cylinder, stiff fast regime
std::vector<std::string> case_names();
bool is_case_name(const std::string& name);

// Builds a case; an unknown name throws ConfigError listing the library.
// With a spec, its material/config overrides are folded in first.
CaseDefinition make_case(const std::string& name);
CaseDefinition make_case(const RunSpec& spec);

}  // namespace aimm
