#include "aimm/solid/solid.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "aimm/core/quadrature.hpp"

namespace aimm {

SolidMaterial SolidMaterial::from_E_nu(double rho0, double E, double nu) {
    if (nu >= 0.5) throw Error("solid material: nu must be < 0.5");
    SolidMaterial m;
    m.rho0 = rho0;
    m.mu_s = E / (2.0 * (1.0 + nu));
    m.kappa = E / (3.0 * (1.0 - 2.0 * nu));
    m.validate();
    return m;
}

SolidMaterial SolidMaterial::from_mu_lambda(double rho0, double mu, double lambda) {
    SolidMaterial m;
    m.rho0 = rho0;
    m.mu_s = mu;
    m.kappa = lambda + 2.0 * mu / 3.0;
    m.validate();
    return m;
}

void SolidMaterial::validate() const {
    if (!(rho0 > 0.0) || !(mu_s > 0.0) || !(kappa > 0.0))
        throw Error("solid material: rho0, mu_s, kappa must all be positive");
}

void SolidBCs::validate() const {
    for (const auto& [tag, fn] : dirichlet)
        if (neumann.count(tag))
            throw Error("boundary tag " + std::to_string(tag) +
                        " appears in both dirichlet and neumann maps");
}

double neo_hookean_pressure(double J, double kappa) {
    if (!(J > 0.0)) throw NonPositiveJacobian();
    return 0.5 * kappa * (J - 1.0 / J);
}

DevStress deviatoric_stress(const Mat2& F, double mu_s) {
    double J = F.det();
    if (!(J > 0.0)) throw NonPositiveJacobian();
    Mat2 B = F * F.transposed();
    double tr3 = B.trace() + 1.0;  // plane strain: B33 = 1
    double c = mu_s * std::pow(J, -5.0 / 3.0);
    DevStress d;
    d.plane = Sym2{c * (B.a11 - tr3 / 3.0), c * (B.a22 - tr3 / 3.0),
                   c * 0.5 * (B.a12 + B.a21)};
    d.zz = c * (1.0 - tr3 / 3.0);
    return d;
}

GeomIncrement linearized_geometry(const Mat2& grad_u_x, const Mat2& grad_delta_x) {
    Mat2 A = Mat2::identity() - grad_u_x;
    double fro = A.frobenius();
    if (std::abs(A.det()) <= 1e-12 * std::max(1.0, fro * fro)) throw SingularGradient();
    Mat2 F = A.inverse();                 // deformation gradient, Eulerian pull-back
    Mat2 Hx = F - Mat2::identity();       // reference displacement gradient
    Mat2 Hd = grad_delta_x * F;           // reference gradient of the increment
    GeomIncrement g;
    g.b = Hx + Hx.transposed() + Hx * Hx.transposed() + Mat2::identity();
    g.linear = Hd + Hd.transposed() + Hd * Hx.transposed() + Hx * Hd.transposed();
    g.full = g.linear + Hd * Hd.transposed();
    return g;
}

std::pair<double, double> stab_params_solid(double h_K, double rho_s, double dt,
                                            const SolidMaterial& mat, double c0, double c1,
                                            double c2) {
    double inertial = rho_s / ((c0 * dt) * (c0 * dt));
    double shear = 2.0 * mat.mu_s / (c1 * h_K * h_K);
    double tau_u = 1.0 / std::sqrt(inertial * inertial + shear * shear);
    double tau_c = 1.0 / (2.0 * c2 * mat.mu_s);
    return {tau_u, tau_c};
}

namespace {

std::vector<std::vector<int>> solid_dof_lists(const TriMesh& m) {
    std::vector<std::vector<int>> lists;
    lists.reserve(m.n_tris());
    for (const auto& t : m.tris()) {
        std::vector<int> dofs(9);
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) dofs[3 * i + k] = 3 * t[i] + k;
        lists.push_back(std::move(dofs));
    }
    return lists;
}

// exact P1 mass weights: integral of N_i N_k over the element = area * w(i,k)
inline double massw(int i, int k) { return (i == k ? 2.0 : 1.0) / 12.0; }

}  // namespace

SolidSolver::SolidSolver(TriMesh reference, SolidMaterial mat, SolidBCs bcs)
    : ref_(std::move(reference)),
      mat_(mat),
      bcs_(std::move(bcs)),
      assembler_(3 * ref_.n_nodes(), solid_dof_lists(ref_)) {
    mat_.validate();
    bcs_.validate();
    if (!bcs_.nodal_load.empty() &&
        bcs_.nodal_load.size() != static_cast<std::size_t>(ref_.n_nodes()))
        throw Error("nodal_load size does not match mesh");
}

SolidState SolidSolver::initial_state() const {
    SolidState s;
    s.mesh = ref_;
    s.X = ref_.coords();
    s.u.assign(ref_.n_nodes(), {});
    s.v.assign(ref_.n_nodes(), {});
    s.a.assign(ref_.n_nodes(), {});
    s.p.assign(ref_.n_nodes(), 0.0);
    s.time = 0.0;
    return s;
}

std::vector<double> SolidSolver::det_F(const SolidState& s) const {
    std::vector<double> J(ref_.n_tris());
    for (int t = 0; t < ref_.n_tris(); ++t) {
        const auto& tr = ref_.tri(t);
        const auto& G = ref_.grads(t);
        Mat2 H;
        for (int j = 0; j < 3; ++j) H += Mat2::outer(s.u[tr[j]], G[j]);
        J[t] = (Mat2::identity() + H).det();
    }
    return J;
}

StabParamsSolid SolidSolver::stab_params(const SolidState& s, double dt) const {
    StabParamsSolid sp;
    sp.c0 = stab_c0;
    sp.c1 = stab_c1;
    sp.c2 = stab_c2;
    sp.tau_u.resize(ref_.n_tris());
    std::vector<double> J = det_F(s);
    for (int t = 0; t < ref_.n_tris(); ++t) {
        double h = s.mesh.altitude(t);  // current-configuration element size
        double rho = mat_.rho0 / J[t];
        sp.tau_u[t] = stab_params_solid(h, rho, dt, mat_, sp.c0, sp.c1, sp.c2).first;
    }
    sp.tau_c = 1.0 / (2.0 * sp.c2 * mat_.mu_s);
    return sp;
}

SolidSolver::StepContext SolidSolver::make_context(const SolidState& s, double dt) const {
    StepContext ctx;
    ctx.dt = dt;
    ctx.time_new = s.time + dt;
    ctx.stab = stab_params(s, dt);
    ctx.u_n = s.u;
    ctx.v_n = s.v;
    ctx.a_n = s.a;
    return ctx;
}

std::vector<double> SolidSolver::pack(const SolidState& s) const {
    std::vector<double> U(3 * ref_.n_nodes());
    for (int n = 0; n < ref_.n_nodes(); ++n) {
        U[3 * n] = s.u[n].x;
        U[3 * n + 1] = s.u[n].y;
        U[3 * n + 2] = s.p[n];
    }
    return U;
}

void SolidSolver::unpack(const std::vector<double>& U, const StepContext& ctx,
                         SolidState& s) const {
    const int nn = ref_.n_nodes();
    const double a0 = 4.0 / (ctx.dt * ctx.dt), a2 = 4.0 / ctx.dt, a3 = 1.0;
    s.u.resize(nn);
    s.p.resize(nn);
    s.a.resize(nn);
    s.v.resize(nn);
    std::vector<Vec2> x(nn);
    for (int n = 0; n < nn; ++n) {
        s.u[n] = {U[3 * n], U[3 * n + 1]};
        s.p[n] = U[3 * n + 2];
        Vec2 acc = (s.u[n] - ctx.u_n[n]) * a0 - ctx.v_n[n] * a2 - ctx.a_n[n] * a3;
        s.v[n] = ctx.v_n[n] + (ctx.a_n[n] + acc) * (ctx.dt / 2.0);
        s.a[n] = acc;
        x[n] = s.X[n] + s.u[n];
    }
    s.mesh = ref_.with_coords(std::move(x));
    s.time = ctx.time_new;
}

std::vector<std::pair<int, double>> SolidSolver::dirichlet_rows(double time_new) const {
    std::vector<std::pair<int, double>> out;
    std::map<int, double> seen;
    for (const auto& e : ref_.boundary_edges()) {
        auto it = bcs_.dirichlet.find(e.tag);
        if (it == bcs_.dirichlet.end()) continue;
        for (int n : {e.a, e.b}) {
            Vec2 l = it->second(ref_.coord(n), time_new);
            for (int c = 0; c < 2; ++c) {
                int dof = 3 * n + c;
                double val = (c == 0) ? l.x : l.y;
                auto [pos, fresh] = seen.emplace(dof, val);
                if (!fresh) {
                    if (std::abs(pos->second - val) >
                        1e-12 * std::max({1.0, std::abs(val), std::abs(pos->second)}))
                        throw ConflictingConstraint(dof, pos->second, val);
                    continue;
                }
                out.emplace_back(dof, val);
            }
        }
    }
    return out;
}

void SolidSolver::assemble(const StepContext& ctx, const std::vector<double>& U, CsrMatrix& J,
                           std::vector<double>& R, bool want_matrix) const {
    const double a0 = 4.0 / (ctx.dt * ctx.dt);
    const double rho0 = mat_.rho0;
    const double mu = mat_.mu_s;
    const double kap = mat_.kappa;
    const double tc = ctx.stab.tau_c;
    const Vec2 f = bcs_.body_force;
    const double g0 = bcs_.volumetric_source;

    Assembler& asmref = assembler_;
    asmref.begin();

    std::array<int, 9> dofs{};
    std::array<double, 9> Rl{};
    std::array<double, 81> Jl{};

    for (int t = 0; t < ref_.n_tris(); ++t) {
        const auto& tr = ref_.tri(t);
        const auto& G = ref_.grads(t);
        const double A0 = ref_.area(t);
        const double tu = ctx.stab.tau_u[t];

        Vec2 u[3], udd[3];
        double p[3];
        for (int j = 0; j < 3; ++j) {
            int n = tr[j];
            u[j] = {U[3 * n], U[3 * n + 1]};
            p[j] = U[3 * n + 2];
            udd[j] = (u[j] - ctx.u_n[n]) * a0 - ctx.v_n[n] * (4.0 / ctx.dt) - ctx.a_n[n];
            for (int k = 0; k < 3; ++k) dofs[3 * j + k] = 3 * n + k;
        }

        Mat2 H;
        for (int j = 0; j < 3; ++j) H += Mat2::outer(u[j], G[j]);
        Mat2 F = Mat2::identity() + H;
        double Jd = F.det();
        if (!(Jd > 0.0)) throw NonPositiveJacobian(t);
        Mat2 Finv = F.inverse();
        Mat2 FinvT = Finv.transposed();

        Vec2 g[3], q[3], mvec[3];
        for (int j = 0; j < 3; ++j) {
            g[j] = FinvT * G[j];   // current-configuration basis gradient
            q[j] = F * G[j];
            mvec[j] = FinvT * g[j];
        }
        double divu = 2.0 - Finv.trace();
        Vec2 gradp = g[0] * p[0] + g[1] * p[1] + g[2] * p[2];
        double pbar = (p[0] + p[1] + p[2]) / 3.0;
        Vec2 uddbar = (udd[0] + udd[1] + udd[2]) / 3.0;

        Mat2 B = F * F.transposed();
        double tr3 = B.trace() + 1.0;
        double cdev = mu * std::pow(Jd, -5.0 / 3.0);
        Sym2 dev{cdev * (B.a11 - tr3 / 3.0), cdev * (B.a22 - tr3 / 3.0),
                 cdev * 0.5 * (B.a12 + B.a21)};

        const double Ax = A0 * Jd;                 // current element area
        const double sc = g0 - divu + pbar / kap;  // volumetric residual

        Rl.fill(0.0);
        for (int i = 0; i < 3; ++i) {
            Vec2 devgi = dev * g[i];
            for (int a = 0; a < 2; ++a) {
                double r = 0.0;
                for (int k = 0; k < 3; ++k)
                    r += rho0 * A0 * massw(i, k) * (a == 0 ? udd[k].x : udd[k].y);
                r += Ax * (a == 0 ? devgi.x : devgi.y);
                r += Ax * pbar * (a == 0 ? g[i].x : g[i].y);
                r += Ax * tc * sc * (a == 0 ? g[i].x : g[i].y);
                r -= Ax * (a == 0 ? f.x : f.y) / 3.0;
                Rl[3 * i + a] = r;
            }
            double pmass = 0.0;
            for (int k = 0; k < 3; ++k) pmass += massw(i, k) * p[k];
            double rc = Ax * divu / 3.0;
            rc -= (Ax / kap) * pmass;
            rc += (tc / kap) * (Ax * divu / 3.0 - (Ax / kap) * pmass - Ax * g0 / 3.0);
            rc += tu * (rho0 * A0 * uddbar.dot(g[i]) - Ax * (gradp + f).dot(g[i]));
            rc -= Ax * g0 / 3.0;
            Rl[3 * i + 2] = rc;
        }

        if (want_matrix) {
            Jl.fill(0.0);
            for (int j = 0; j < 3; ++j) {
                // displacement columns
                for (int c = 0; c < 2; ++c) {
                    const int col = 3 * j + c;
                    const double gjc = (c == 0 ? g[j].x : g[j].y);
                    const double ddiv = (c == 0 ? mvec[j].x : mvec[j].y);
                    // dB restricted to the plane block
                    Sym2 dB = (c == 0) ? Sym2{2.0 * q[j].x, 0.0, q[j].y}
                                       : Sym2{0.0, 2.0 * q[j].y, q[j].x};
                    double dtr3 = 2.0 * (c == 0 ? q[j].x : q[j].y);
                    Sym2 ddev = dev * (-5.0 / 3.0 * gjc) +
                                Sym2{cdev * (dB.xx - dtr3 / 3.0), cdev * (dB.yy - dtr3 / 3.0),
                                     cdev * dB.xy};
                    const double dgradp_c = (c == 0 ? gradp.x : gradp.y);

                    for (int i = 0; i < 3; ++i) {
                        const double gic = (c == 0 ? g[i].x : g[i].y);
                        Vec2 dgi = g[j] * (-gic);
                        Vec2 devgi = dev * g[i];
                        Vec2 ddevgi = ddev * g[i];
                        Vec2 devdgi = dev * dgi;
                        for (int a = 0; a < 2; ++a) {
                            const double gia = (a == 0 ? g[i].x : g[i].y);
                            const double dgia = (a == 0 ? dgi.x : dgi.y);
                            double v = rho0 * A0 * massw(i, j) * a0 * (a == c ? 1.0 : 0.0);
                            v += Ax * gjc * (a == 0 ? devgi.x : devgi.y);
                            v += Ax * (a == 0 ? ddevgi.x : ddevgi.y);
                            v += Ax * (a == 0 ? devdgi.x : devdgi.y);
                            v += Ax * pbar * (gjc * gia + dgia);
                            v += tc * Ax * (gjc * sc * gia - ddiv * gia + sc * dgia);
                            v -= (a == 0 ? f.x : f.y) / 3.0 * Ax * gjc;
                            Jl[(3 * i + a) * 9 + col] += v;
                        }
                        // continuity row
                        double pmass = 0.0;
                        for (int k = 0; k < 3; ++k) pmass += massw(i, k) * p[k];
                        double v = Ax * (gjc * divu + ddiv) / 3.0;
                        v -= gjc * (Ax / kap) * pmass;
                        v += (tc / kap) * (Ax * (gjc * divu + ddiv) / 3.0 -
                                           gjc * (Ax / kap) * pmass - (g0 / 3.0) * Ax * gjc);
                        v += tu * rho0 * A0 * (a0 / 3.0 - uddbar.dot(g[j])) * gic;
                        v -= tu * Ax *
                             (gjc * (gradp + f).dot(g[i]) - g[j].dot(g[i]) * dgradp_c -
                              (gradp + f).dot(g[j]) * gic);
                        v -= (g0 / 3.0) * Ax * gjc;
                        Jl[(3 * i + 2) * 9 + col] += v;
                    }
                }
                // pressure column
                const int colp = 3 * j + 2;
                for (int i = 0; i < 3; ++i) {
                    for (int a = 0; a < 2; ++a) {
                        const double gia = (a == 0 ? g[i].x : g[i].y);
                        Jl[(3 * i + a) * 9 + colp] +=
                            Ax * gia / 3.0 + Ax * tc * gia / (3.0 * kap);
                    }
                    double v = -(Ax / kap) * massw(i, j);
                    v -= (tc / (kap * kap)) * Ax * massw(i, j);
                    v -= tu * Ax * g[j].dot(g[i]);
                    Jl[(3 * i + 2) * 9 + colp] += v;
                }
            }
            asmref.add(dofs, Jl, Rl);
        } else {
            asmref.add(dofs, {}, Rl);
        }
    }

    // dead-load tractions on the tagged reference boundary
    if (!bcs_.neumann.empty()) {
        for (const auto& e : ref_.boundary_edges()) {
            auto it = bcs_.neumann.find(e.tag);
            if (it == bcs_.neumann.end()) continue;
            Vec2 Xa = ref_.coord(e.a), Xb = ref_.coord(e.b);
            double len = (Xb - Xa).norm();
            std::array<int, 4> edofs{3 * e.a, 3 * e.a + 1, 3 * e.b, 3 * e.b + 1};
            std::array<double, 4> er{};
            for (const auto& gp : kLineQuad2) {
                Vec2 X = Xa + (Xb - Xa) * gp.s;
                Vec2 tr = it->second(X, ctx.time_new);
                er[0] -= len * gp.w * (1.0 - gp.s) * tr.x;
                er[1] -= len * gp.w * (1.0 - gp.s) * tr.y;
                er[2] -= len * gp.w * gp.s * tr.x;
                er[3] -= len * gp.w * gp.s * tr.y;
            }
            asmref.add(edofs, {}, er);
        }
    }
    if (!bcs_.nodal_load.empty()) {
        for (int n = 0; n < ref_.n_nodes(); ++n) {
            if (bcs_.nodal_load[n].x == 0.0 && bcs_.nodal_load[n].y == 0.0) continue;
            std::array<int, 2> ndofs{3 * n, 3 * n + 1};
            std::array<double, 2> nr{-bcs_.nodal_load[n].x, -bcs_.nodal_load[n].y};
            asmref.add(ndofs, {}, nr);
        }
    }

    asmref.finalize(J, R);

    // prescribed displacements: identity rows, residual drives u to the target
    for (const auto& [dof, val] : dirichlet_rows(ctx.time_new)) {
        if (want_matrix) {
            auto& vals = J.values();
            for (int k = J.offsets()[dof]; k < J.offsets()[dof + 1]; ++k)
                vals[k] = (J.cols()[k] == dof) ? 1.0 : 0.0;
        }
        R[dof] = U[dof] - val;
    }
}

SolidStepResult SolidSolver::step(SolidState& s, double dt) {
    if (!(dt > 0.0)) throw Error("step_solid: dt must be positive");
    StepContext ctx = make_context(s, dt);
    std::vector<double> U0 = pack(s);

    NewtonSystem sys;
    sys.assemble = [this, &ctx](const std::vector<double>& U, CsrMatrix& J,
                                std::vector<double>& R) { assemble(ctx, U, J, R, true); };
    auto scratch = std::make_shared<CsrMatrix>();
    sys.residual = [this, &ctx, scratch](const std::vector<double>& U) {
        std::vector<double> R;
        assemble(ctx, U, *scratch, R, false);
        return R;
    };

    auto [U, rep] = newton_solve(sys, std::move(U0), newton);
    unpack(U, ctx, s);
    return {rep};
}

double SolidSolver::energy(const SolidState& s) const {
    double E = 0.0;
    for (int t = 0; t < ref_.n_tris(); ++t) {
        const auto& tr = ref_.tri(t);
        const auto& G = ref_.grads(t);
        double A0 = ref_.area(t);
        Mat2 H;
        for (int j = 0; j < 3; ++j) H += Mat2::outer(s.u[tr[j]], G[j]);
        Mat2 F = Mat2::identity() + H;
        double Jd = F.det();
        if (!(Jd > 0.0)) throw NonPositiveJacobian(t);
        Mat2 B = F * F.transposed();
        double tr3 = B.trace() + 1.0;
        double divu = 2.0 - F.inverse().trace();
        // deviatoric stored energy + linearized volumetric energy
        E += A0 * 0.5 * mat_.mu_s * (std::pow(Jd, -2.0 / 3.0) * tr3 - 3.0);
        E += A0 * Jd * 0.5 * mat_.kappa * divu * divu;
        // consistent-mass kinetic energy
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                E += 0.5 * mat_.rho0 * A0 * massw(i, k) * s.v[tr[i]].dot(s.v[tr[k]]);
    }
    return E;
}

}  // namespace aimm
