#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "aimm/core/mesh.hpp"
#include "aimm/la/newton.hpp"
#include "aimm/la/sparse.hpp"

namespace aimm {

// Hyperelastic material with a linearized volumetric law: deviatoric stress
// from a Neo-Hookean model, pressure tied to div(u) through the bulk modulus.
struct SolidMaterial {
    double rho0 = 1.0;   // reference density (mass per reference area)
    double mu_s = 1.0;   // shear modulus
    double kappa = 1.0;  // bulk modulus

    static SolidMaterial from_E_nu(double rho0, double E, double nu);
    static SolidMaterial from_mu_lambda(double rho0, double mu, double lambda);
    void validate() const;
};

// Volumetric pressure U'(J) = kappa/2 (J - 1/J): zero at J = 1, tension
// positive. Throws NonPositiveJacobian for J <= 0.
double neo_hookean_pressure(double J, double kappa);

// In-plane block of the 3D deviator of mu J^{-5/3} F F^T under plane strain
// (F33 = 1), plus the out-of-plane component so the zero-trace property can
// be checked: plane.xx + plane.yy + zz == 0.
struct DevStress {
    Sym2 plane;
    double zz = 0.0;
};

DevStress deviatoric_stress(const Mat2& F, double mu_s);

// Incremental kinematics of B = F F^T under a displacement variation.
// grad_u and grad_delta are gradients with respect to the current
// configuration; internally the map is pulled back through
// grad_X u = (I - grad_x u)^{-1} - I. `linear` is the tangent of B in the
// variation, `full` adds the quadratic term so that
// B(u + delta) = B(u) + full holds exactly.
struct GeomIncrement {
    Mat2 b;        // F F^T at u
    Mat2 linear;   // d B [delta]
    Mat2 full;     // finite increment
};

GeomIncrement linearized_geometry(const Mat2& grad_u_x, const Mat2& grad_delta_x);

// Element stabilization parameters. tau_u balances inertia against shear
// stiffness; tau_c is element independent.
//   tau_u = ((rho_s/(c0 dt)^2)^2 + (2 mu_s/(c1 h^2))^2)^{-1/2}
//   tau_c = 1/(2 c2 mu_s)
std::pair<double, double> stab_params_solid(double h_K, double rho_s, double dt,
                                            const SolidMaterial& mat, double c0, double c1,
                                            double c2);

struct StabParamsSolid {
    double c0 = 1.0, c1 = 4.0, c2 = 1.0;
    std::vector<double> tau_u;  // per element
    double tau_c = 0.0;
};

// Boundary conditions and loads. Dirichlet prescribes displacement on tagged
// boundary nodes; Neumann tractions are integrated over the tagged reference
// boundary edges as dead loads. nodal_load carries already-integrated forces
// (the fluid coupling path). A tag must not be both Dirichlet and Neumann.
struct SolidBCs {
    std::map<int, std::function<Vec2(Vec2 X, double t)>> dirichlet;
    std::map<int, std::function<Vec2(Vec2 X, double t)>> neumann;
    Vec2 body_force{};
    double volumetric_source = 0.0;       // source g of the volumetric balance
    std::vector<Vec2> nodal_load;         // per node, optional (empty = none)
    void validate() const;
};

struct SolidState {
    TriMesh mesh;              // current configuration, x = X + u
    std::vector<Vec2> X;       // reference coordinates
    std::vector<Vec2> u, v, a; // displacement, velocity, acceleration
    std::vector<double> p;     // pressure
    double time = 0.0;
};

struct SolidStepResult {
    NewtonReport newton;
};

// Mixed displacement/pressure dynamic solver on a fixed reference mesh.
// Degrees of freedom per node: (u_x, u_y, p). Assembly is a pull-back to the
// reference configuration, so the residual is an explicit function of the dof
// vector and the Jacobian is its exact derivative (stabilization parameters
// enter as frozen per-step data).
class SolidSolver {
  public:
    SolidSolver(TriMesh reference, SolidMaterial mat, SolidBCs bcs);

    const TriMesh& reference() const { return ref_; }
    const SolidMaterial& material() const { return mat_; }
    SolidBCs& bcs() { return bcs_; }

    SolidState initial_state() const;

    // tau_u per element evaluated on the state's current configuration
    StabParamsSolid stab_params(const SolidState& s, double dt) const;

    // Newmark history frozen at the entry state; U = interleaved (ux,uy,p).
    struct StepContext {
        double dt;
        double time_new;
        StabParamsSolid stab;
        std::vector<Vec2> u_n, v_n, a_n;
    };
    StepContext make_context(const SolidState& s, double dt) const;

    void assemble(const StepContext& ctx, const std::vector<double>& U, CsrMatrix& J,
                  std::vector<double>& R, bool want_matrix = true) const;

    SolidStepResult step(SolidState& s, double dt);

    // dof vector of a state / write a dof vector back into a state
    std::vector<double> pack(const SolidState& s) const;
    void unpack(const std::vector<double>& U, const StepContext& ctx, SolidState& s) const;

    // strain + kinetic energy of a state (volumetric part linearized to match
    // the discrete model)
    double energy(const SolidState& s) const;

    // per-element det F of a state
    std::vector<double> det_F(const SolidState& s) const;

    NewtonOpts newton{};
    double stab_c0 = 1.0, stab_c1 = 4.0, stab_c2 = 1.0;

  private:
    std::vector<std::pair<int, double>> dirichlet_rows(double time_new) const;

    TriMesh ref_;
    SolidMaterial mat_;
    SolidBCs bcs_;
    mutable Assembler assembler_;  // scratch arena reused across assemblies
};

}  // namespace aimm
