#pragma once

#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "aimm/core/mesh.hpp"
#include "aimm/la/newton.hpp"
#include "aimm/la/sparse.hpp"

namespace aimm {

struct FluidMaterial {
    double rho_f = 1.0;  // density
    double mu_f = 1.0;   // dynamic viscosity
    void validate() const;
};

// Parabolic channel profile with mean U_bar: 1.5 U_bar y (H - y) / (H/2)^2.
double inlet_profile_turek(double y, double U_bar, double H);

// Smooth start-up factor 1 - exp(-(2.5 t)^2).
double ramp_factor(double t);

// Dynamic ASGS parameters:
//   tau_u = [ (c0 rho/dt)^2 + (c1 mu/h^2)^2 + (c2 rho |v|/h)^2 ]^{-1/2}
//   tau_c = h^2 / (c3 tau_u)
std::pair<double, double> stab_params_fluid(double h_K, double v_norm, double dt,
                                            const FluidMaterial& mat, double c0, double c1,
                                            double c2, double c3);

struct StabParamsFluid {
    double c0 = 2.0, c1 = 4.0, c2 = 2.0, c3 = 1.0;
    std::vector<double> tau_u, tau_c;  // per element
};

// Velocity boundary data. Kinds must use disjoint tags. At a node shared by
// several Dirichlet-tagged edges the lowest tag wins (the usual corner rule,
// e.g. no-slip walls beat a moving lid). Immersed constraints override
// everything; they are refreshed by the coupling driver every step.
struct FluidBCs {
    std::map<int, std::function<Vec2(Vec2 x, double t)>> dirichlet;
    std::map<int, std::function<Vec2(Vec2 x, double t)>> traction;
    std::set<int> slip;  // zero normal velocity, free tangential
    std::vector<std::pair<int, Vec2>> immersed;
    Vec2 body_force{};
    // enclosed flows have no natural pressure level; pin this node's p to 0
    int pin_pressure_node = -1;
    void validate() const;
};

struct FluidState {
    TriMesh mesh;
    VectorField v;
    ScalarField p;
    double time = 0.0;
};

struct FluidStepResult {
    NewtonReport newton;
};

// Backward-Euler Navier-Stokes solver with equal-order elements and
// SUPG/PSPG/grad-div stabilization. Degrees of freedom per node:
// (v_x, v_y, p). The solver is bound to one mesh; after adaptation a new
// solver is built on the new mesh. Stabilization parameters are frozen at the
// entry state of each step, so the assembled Jacobian is the exact derivative
// of the assembled residual.
class FluidSolver {
  public:
    FluidSolver(TriMesh mesh, FluidMaterial mat, FluidBCs bcs);

    const TriMesh& mesh() const { return mesh_; }
    const FluidMaterial& material() const { return mat_; }
    FluidBCs& bcs() { return bcs_; }

    FluidState initial_state() const;

    StabParamsFluid stab_params(const FluidState& s, double dt) const;

    struct StepContext {
        double dt;
        double time_new;
        StabParamsFluid stab;
        std::vector<Vec2> v_n;  // previous-step velocity for the time term
    };
    StepContext make_context(const FluidState& s, double dt) const;

    void assemble(const StepContext& ctx, const std::vector<double>& U, CsrMatrix& J,
                  std::vector<double>& R, bool want_matrix = true) const;

    FluidStepResult step(FluidState& s, double dt);

    std::vector<double> pack(const FluidState& s) const;
    void unpack(const std::vector<double>& U, const StepContext& ctx, FluidState& s) const;

    NewtonOpts newton{};
    double stab_c0 = 2.0, stab_c1 = 4.0, stab_c2 = 2.0, stab_c3 = 1.0;

  private:
    struct Constraint {
        int row;            // matrix row replaced
        double nx, ny;      // row coefficients on (v_x, v_y); (1,0)/(0,1) for
                            // component constraints, the node normal for slip
        double value;       // prescribed value of nx*v_x + ny*v_y
        bool pressure = false;
    };
    std::vector<Constraint> constraint_rows(double time_new) const;

    TriMesh mesh_;
    FluidMaterial mat_;
    FluidBCs bcs_;
    mutable Assembler assembler_;
};

// Net volume flux through the whole boundary (exact for P1 velocity).
double boundary_flux(const FluidState& s);
// Flux through the edges carrying one tag.
double boundary_flux(const FluidState& s, int tag);

// Integral of the fluid stress sigma = 2 mu sym(grad v) - p I over a
// polyline, sampled with 2-point Gauss per segment. Segment normals are the
// direction of travel rotated -90 degrees, so a counter-clockwise loop around
// an immersed body points them into the surrounding fluid. Returns the force
// exerted by the fluid on the enclosed body: (drag, lift).
Vec2 interface_force(const FluidState& s, const FluidMaterial& mat, std::span<const Vec2> pts,
                     bool closed);

}  // namespace aimm
