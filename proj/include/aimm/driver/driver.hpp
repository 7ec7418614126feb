#pragma once

#include <memory>
#include <optional>
#include <string>

#include "aimm/adapt/remesh.hpp"
#include "aimm/driver/cases.hpp"
#include "aimm/driver/config.hpp"
#include "aimm/interface/coupling.hpp"
#include "aimm/interface/levelset.hpp"

namespace aimm {

// One committed step of the coupled system.
struct StepLog {
    double t = 0.0;        // time after the step
    Vec2 tip_u{};          // control-point displacement
    Vec2 force{};          // fluid force on the wetted interface: (drag, lift)
    int newton_fluid = 0;  // iterations of the last sub-iteration's solves
    int newton_solid = 0;
    int subiters = 0;
    double residual = 0.0;  // final relative interface-velocity change
    int nodes = 0;          // fluid nodes used during the step
};

// Partitioned fluid-structure driver: per step it sub-iterates
// immersion -> fluid solve -> traction exchange -> solid solve, relaxing the
// traction loads (Aitken by default), and on a fixed step cadence rebuilds
// the fluid mesh to the {level set, velocity} metric.
class FsiDriver {
  public:
    FsiDriver(CaseDefinition def, CouplingConfig cfg);

    // advances both states from t to t + dt; throws CouplingDiverged when the
    // interface residual grows three sub-iterations in a row
    StepLog advance();

    // runs the metric adaptation when `step` falls on the cadence (step 0
    // included: the initial mesh gets aligned to the interface)
    std::optional<RemeshResult> maybe_adapt(int step);

    const FluidState& fluid() const { return fs_; }
    const SolidState& solid() const { return ss_; }
    const CaseDefinition& def() const { return def_; }
    const CouplingConfig& config() const { return cfg_; }
    const SolidSolver& solid_solver() const { return *solid_; }
    int steps_done() const { return step_; }
    int tip_node() const { return tip_node_; }
    Vec2 tip_displacement() const;

    // wetted interface in the current configuration; for a rigid-disk case
    // the solid's clamped edge is replaced by the complementary circle arc
    InterfacePolyline composite_interface() const;
    // signed distance to the composite interface on the current fluid mesh
    LevelSet level_set() const;
    // fluid force on the composite interface (drag, lift)
    Vec2 interface_load() const;

    // versioned binary snapshot; loading refuses a mismatched case/config
    void save_checkpoint(const std::string& path) const;
    void load_checkpoint(const std::string& path);

  private:
    void rebuild_fluid_solver();
    std::vector<std::pair<int, Vec2>> immersion_constraints(const LevelSet& ls) const;
    std::vector<double> interface_velocity(const SolidState& s) const;
    std::uint64_t config_hash() const;

    CaseDefinition def_;
    CouplingConfig cfg_;
    std::unique_ptr<FluidSolver> fluid_;  // rebuilt after every remesh
    std::unique_ptr<SolidSolver> solid_;
    FluidState fs_;
    SolidState ss_;
    int step_ = 0;
    int tip_node_ = -1;
};

// Full time loop with CSV/VTK/summary/checkpoint outputs under cfg.out_dir.
// `resume` (optional path) restores a checkpoint and continues; outputs go
// to cfg.out_dir regardless. Returns the number of committed steps.
int run_case(const CaseDefinition& def, const CouplingConfig& cfg,
             const std::string& resume = "");

}  // namespace aimm
