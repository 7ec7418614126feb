#include "aimm/fluid/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "aimm/core/quadrature.hpp"

namespace aimm {

void FluidMaterial::validate() const {
    if (!(rho_f > 0.0) || !(mu_f > 0.0))
        throw Error("fluid material: rho_f and mu_f must be positive");
}

void FluidBCs::validate() const {
    for (const auto& [tag, fn] : dirichlet) {
        if (traction.count(tag))
            throw Error("boundary tag " + std::to_string(tag) +
                        " appears in both dirichlet and traction maps");
        if (slip.count(tag))
            throw Error("boundary tag " + std::to_string(tag) + " is both dirichlet and slip");
    }
    for (const auto& [tag, fn] : traction)
        if (slip.count(tag))
            throw Error("boundary tag " + std::to_string(tag) + " is both traction and slip");
}

double inlet_profile_turek(double y, double U_bar, double H) {
    double half = H / 2.0;
    return 1.5 * U_bar * y * (H - y) / (half * half);
}

double ramp_factor(double t) {
    double a = 2.5 * t;
    return 1.0 - std::exp(-a * a);
}

std::pair<double, double> stab_params_fluid(double h_K, double v_norm, double dt,
                                            const FluidMaterial& mat, double c0, double c1,
                                            double c2, double c3) {
    double inertial = c0 * mat.rho_f / dt;
    double viscous = c1 * mat.mu_f / (h_K * h_K);
    double advective = c2 * mat.rho_f * v_norm / h_K;
    double tau_u =
        1.0 / std::sqrt(inertial * inertial + viscous * viscous + advective * advective);
    double tau_c = h_K * h_K / (c3 * tau_u);
    return {tau_u, tau_c};
}

namespace {

std::vector<std::vector<int>> fluid_dof_lists(const TriMesh& m) {
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

inline Vec2 column(const Mat2& m, int c) {
    return c == 0 ? Vec2{m.a11, m.a21} : Vec2{m.a12, m.a22};
}

}  // namespace

FluidSolver::FluidSolver(TriMesh mesh, FluidMaterial mat, FluidBCs bcs)
    : mesh_(std::move(mesh)),
      mat_(mat),
      bcs_(std::move(bcs)),
      assembler_(3 * mesh_.n_nodes(), fluid_dof_lists(mesh_)) {
    mat_.validate();
    bcs_.validate();
}

FluidState FluidSolver::initial_state() const {
    FluidState s;
    s.mesh = mesh_;
    s.v = mesh_.make_vector_field();
    s.p = mesh_.make_scalar_field();
    s.time = 0.0;
    return s;
}

StabParamsFluid FluidSolver::stab_params(const FluidState& s, double dt) const {
    StabParamsFluid sp;
    sp.c0 = stab_c0;
    sp.c1 = stab_c1;
    sp.c2 = stab_c2;
    sp.c3 = stab_c3;
    sp.tau_u.resize(mesh_.n_tris());
    sp.tau_c.resize(mesh_.n_tris());
    for (int t = 0; t < mesh_.n_tris(); ++t) {
        const auto& tr = mesh_.tri(t);
        Vec2 vbar = (s.v.values[tr[0]] + s.v.values[tr[1]] + s.v.values[tr[2]]) / 3.0;
        auto [tu, tc] = stab_params_fluid(mesh_.altitude(t), vbar.norm(), dt, mat_, sp.c0,
                                          sp.c1, sp.c2, sp.c3);
        sp.tau_u[t] = tu;
        sp.tau_c[t] = tc;
    }
    return sp;
}

FluidSolver::StepContext FluidSolver::make_context(const FluidState& s, double dt) const {
    StepContext ctx;
    ctx.dt = dt;
    ctx.time_new = s.time + dt;
    ctx.stab = stab_params(s, dt);
    ctx.v_n = s.v.values;
    return ctx;
}

std::vector<double> FluidSolver::pack(const FluidState& s) const {
    std::vector<double> U(3 * mesh_.n_nodes());
    for (int n = 0; n < mesh_.n_nodes(); ++n) {
        U[3 * n] = s.v.values[n].x;
        U[3 * n + 1] = s.v.values[n].y;
        U[3 * n + 2] = s.p.values[n];
    }
    return U;
}

void FluidSolver::unpack(const std::vector<double>& U, const StepContext& ctx,
                         FluidState& s) const {
    for (int n = 0; n < mesh_.n_nodes(); ++n) {
        s.v.values[n] = {U[3 * n], U[3 * n + 1]};
        s.p.values[n] = U[3 * n + 2];
    }
    s.time = ctx.time_new;
}

std::vector<FluidSolver::Constraint> FluidSolver::constraint_rows(double time_new) const {
    std::vector<Constraint> out;
    std::map<int, int> owner;  // node -> owning dirichlet tag
    // Dirichlet tags in ascending order; the first tag to reach a node keeps it
    for (const auto& [tag, fn] : bcs_.dirichlet) {
        for (const auto& e : mesh_.boundary_edges()) {
            if (e.tag != tag) continue;
            for (int n : {e.a, e.b}) {
                auto [it, fresh] = owner.emplace(n, tag);
                if (!fresh) continue;
                Vec2 val = fn(mesh_.coord(n), time_new);
                out.push_back({3 * n, 1.0, 0.0, val.x, false});
                out.push_back({3 * n + 1, 0.0, 1.0, val.y, false});
            }
        }
    }
    if (!bcs_.slip.empty()) {
        std::map<int, Vec2> normals;
        for (const auto& e : mesh_.boundary_edges()) {
            if (!bcs_.slip.count(e.tag)) continue;
            Vec2 d = mesh_.coord(e.b) - mesh_.coord(e.a);
            Vec2 n{d.y, -d.x};  // outward
            normals[e.a] += n;
            normals[e.b] += n;
        }
        for (auto& [node, n] : normals) {
            if (owner.count(node)) continue;  // full velocity already prescribed
            double len = n.norm();
            if (len < 1e-300) continue;
            n = n / len;
            int comp = std::abs(n.x) >= std::abs(n.y) ? 0 : 1;
            out.push_back({3 * node + comp, n.x, n.y, 0.0, false});
        }
    }
    // immersed constraints override boundary data
    if (!bcs_.immersed.empty()) {
        std::map<int, Vec2> imm;
        for (const auto& [node, vel] : bcs_.immersed) imm[node] = vel;
        std::erase_if(out, [&](const Constraint& c) { return imm.count(c.row / 3) != 0; });
        for (const auto& [node, vel] : imm) {
            out.push_back({3 * node, 1.0, 0.0, vel.x, false});
            out.push_back({3 * node + 1, 0.0, 1.0, vel.y, false});
        }
    }
    if (bcs_.pin_pressure_node >= 0)
        out.push_back({3 * bcs_.pin_pressure_node + 2, 0.0, 0.0, 0.0, true});
    return out;
}

void FluidSolver::assemble(const StepContext& ctx, const std::vector<double>& U, CsrMatrix& J,
                           std::vector<double>& R, bool want_matrix) const {
    const double rho = mat_.rho_f;
    const double mu = mat_.mu_f;
    const double idt = 1.0 / ctx.dt;
    const Vec2 f = bcs_.body_force;

    assembler_.begin();

    std::array<int, 9> dofs{};
    std::array<double, 9> Rl{};
    std::array<double, 81> Jl{};

    for (int t = 0; t < mesh_.n_tris(); ++t) {
        const auto& tr = mesh_.tri(t);
        const auto& G = mesh_.grads(t);
        const double A = mesh_.area(t);
        const double tu = ctx.stab.tau_u[t];
        const double tc = ctx.stab.tau_c[t];

        Vec2 v[3], vn[3];
        double p[3];
        for (int j = 0; j < 3; ++j) {
            int n = tr[j];
            v[j] = {U[3 * n], U[3 * n + 1]};
            p[j] = U[3 * n + 2];
            vn[j] = ctx.v_n[n];
            for (int k = 0; k < 3; ++k) dofs[3 * j + k] = 3 * n + k;
        }

        Mat2 Gv;
        for (int j = 0; j < 3; ++j) Gv += Mat2::outer(v[j], G[j]);
        const double divv = Gv.trace();
        const Mat2 E = Gv.sym();
        Vec2 gradp = G[0] * p[0] + G[1] * p[1] + G[2] * p[2];
        const double pbar = (p[0] + p[1] + p[2]) / 3.0;

        // quadrature-point values; the momentum residual is linear in x
        Vec2 vq[3], Rm[3], Mgal[3];
        for (int q = 0; q < 3; ++q) {
            const auto& lam = kTriQuad3[q].bary;
            Vec2 vv = v[0] * lam[0] + v[1] * lam[1] + v[2] * lam[2];
            Vec2 vo = vn[0] * lam[0] + vn[1] * lam[1] + vn[2] * lam[2];
            vq[q] = vv;
            Mgal[q] = ((vv - vo) * idt + Gv * vv) * rho - f;
            Rm[q] = Mgal[q] + gradp;
        }

        Rl.fill(0.0);
        for (int i = 0; i < 3; ++i) {
            Vec2 Egi = E * G[i];
            for (int a = 0; a < 2; ++a) {
                double r = 0.0;
                for (int q = 0; q < 3; ++q) {
                    const double w = kTriQuad3[q].w;
                    const double lam_i = kTriQuad3[q].bary[i];
                    double adv_w = vq[q].dot(G[i]);  // SUPG weight v.grad(N_i)
                    r += A * w * (lam_i * (a == 0 ? Mgal[q].x : Mgal[q].y) +
                                  tu * rho * adv_w * (a == 0 ? Rm[q].x : Rm[q].y));
                }
                r += 2.0 * mu * A * (a == 0 ? Egi.x : Egi.y);
                r -= A * pbar * (a == 0 ? G[i].x : G[i].y);
                r += tc * A * divv * (a == 0 ? G[i].x : G[i].y);
                Rl[3 * i + a] = r;
            }
            double rc = A * divv / 3.0;
            for (int q = 0; q < 3; ++q) rc += tu * A * kTriQuad3[q].w * Rm[q].dot(G[i]);
            Rl[3 * i + 2] = rc;
        }

        if (want_matrix) {
            Jl.fill(0.0);
            for (int j = 0; j < 3; ++j) {
                for (int c = 0; c < 2; ++c) {
                    const int col = 3 * j + c;
                    const Vec2 gvcol = column(Gv, c);
                    // d(momentum residual at quad point q) / d v_j[c]
                    Vec2 D[3];
                    double adv_j[3];
                    for (int q = 0; q < 3; ++q) {
                        const double lam_j = kTriQuad3[q].bary[j];
                        adv_j[q] = G[j].dot(vq[q]);
                        Vec2 d = gvcol * lam_j;
                        (c == 0 ? d.x : d.y) += lam_j * idt + adv_j[q];
                        D[q] = d * rho;
                    }
                    for (int i = 0; i < 3; ++i) {
                        for (int a = 0; a < 2; ++a) {
                            double val = mu * A *
                                         ((a == c ? 1.0 : 0.0) * G[j].dot(G[i]) +
                                          (a == 0 ? G[j].x : G[j].y) * (c == 0 ? G[i].x : G[i].y));
                            val += tc * A * (c == 0 ? G[j].x : G[j].y) *
                                   (a == 0 ? G[i].x : G[i].y);
                            for (int q = 0; q < 3; ++q) {
                                const double w = kTriQuad3[q].w;
                                const double lam_i = kTriQuad3[q].bary[i];
                                const double lam_j = kTriQuad3[q].bary[j];
                                val += A * w * lam_i * (a == 0 ? D[q].x : D[q].y);
                                val += tu * rho * A * w *
                                       (lam_j * (c == 0 ? G[i].x : G[i].y) *
                                            (a == 0 ? Rm[q].x : Rm[q].y) +
                                        vq[q].dot(G[i]) * (a == 0 ? D[q].x : D[q].y));
                            }
                            Jl[(3 * i + a) * 9 + col] += val;
                        }
                        double vc = A * (c == 0 ? G[j].x : G[j].y) / 3.0;
                        for (int q = 0; q < 3; ++q)
                            vc += tu * A * kTriQuad3[q].w * D[q].dot(G[i]);
                        Jl[(3 * i + 2) * 9 + col] += vc;
                    }
                }
                const int colp = 3 * j + 2;
                for (int i = 0; i < 3; ++i) {
                    for (int a = 0; a < 2; ++a) {
                        double val = -A * (a == 0 ? G[i].x : G[i].y) / 3.0;
                        for (int q = 0; q < 3; ++q)
                            val += tu * rho * A * kTriQuad3[q].w * vq[q].dot(G[i]) *
                                   (a == 0 ? G[j].x : G[j].y);
                        Jl[(3 * i + a) * 9 + colp] += val;
                    }
                    Jl[(3 * i + 2) * 9 + colp] += tu * A * G[j].dot(G[i]);
                }
            }
            assembler_.add(dofs, Jl, Rl);
        } else {
            assembler_.add(dofs, {}, Rl);
        }
    }

    if (!bcs_.traction.empty()) {
        for (const auto& e : mesh_.boundary_edges()) {
            auto it = bcs_.traction.find(e.tag);
            if (it == bcs_.traction.end()) continue;
            Vec2 xa = mesh_.coord(e.a), xb = mesh_.coord(e.b);
            double len = (xb - xa).norm();
            std::array<int, 4> edofs{3 * e.a, 3 * e.a + 1, 3 * e.b, 3 * e.b + 1};
            std::array<double, 4> er{};
            for (const auto& gp : kLineQuad2) {
                Vec2 x = xa + (xb - xa) * gp.s;
                Vec2 tr = it->second(x, ctx.time_new);
                er[0] -= len * gp.w * (1.0 - gp.s) * tr.x;
                er[1] -= len * gp.w * (1.0 - gp.s) * tr.y;
                er[2] -= len * gp.w * gp.s * tr.x;
                er[3] -= len * gp.w * gp.s * tr.y;
            }
            assembler_.add(edofs, {}, er);
        }
    }

    assembler_.finalize(J, R);

    for (const Constraint& c : constraint_rows(ctx.time_new)) {
        const int n = c.row / 3;
        if (want_matrix) {
            auto& vals = J.values();
            for (int k = J.offsets()[c.row]; k < J.offsets()[c.row + 1]; ++k) {
                int col = J.cols()[k];
                double v = 0.0;
                if (c.pressure) {
                    if (col == c.row) v = 1.0;
                } else {
                    if (col == 3 * n) v = c.nx;
                    if (col == 3 * n + 1) v = c.ny;
                }
                vals[k] = v;
            }
        }
        R[c.row] = c.pressure ? U[c.row] - c.value
                              : c.nx * U[3 * n] + c.ny * U[3 * n + 1] - c.value;
    }
}

FluidStepResult FluidSolver::step(FluidState& s, double dt) {
    if (!(dt > 0.0)) throw Error("step_fluid: dt must be positive");
    if (s.v.gen != mesh_.generation() || s.p.gen != mesh_.generation())
        throw StaleField(s.v.gen, mesh_.generation());
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

double boundary_flux(const FluidState& s) {
    double flux = 0.0;
    for (const auto& e : s.mesh.boundary_edges()) {
        Vec2 d = s.mesh.coord(e.b) - s.mesh.coord(e.a);
        Vec2 n{d.y, -d.x};  // outward, length = edge length
        flux += 0.5 * (s.v.values[e.a] + s.v.values[e.b]).dot(n);
    }
    return flux;
}

double boundary_flux(const FluidState& s, int tag) {
    double flux = 0.0;
    for (const auto& e : s.mesh.boundary_edges()) {
        if (e.tag != tag) continue;
        Vec2 d = s.mesh.coord(e.b) - s.mesh.coord(e.a);
        Vec2 n{d.y, -d.x};
        flux += 0.5 * (s.v.values[e.a] + s.v.values[e.b]).dot(n);
    }
    return flux;
}

Vec2 interface_force(const FluidState& s, const FluidMaterial& mat, std::span<const Vec2> pts,
                     bool closed) {
    const TriMesh& m = s.mesh;
    if (s.v.gen != m.generation() || s.p.gen != m.generation())
        throw StaleField(s.v.gen, m.generation());
    const std::size_t nseg = closed ? pts.size() : (pts.empty() ? 0 : pts.size() - 1);
    Vec2 force{};
    int hint = -1;
    for (std::size_t i = 0; i < nseg; ++i) {
        Vec2 a = pts[i], b = pts[(i + 1) % pts.size()];
        Vec2 d = b - a;
        double len = d.norm();
        if (len < 1e-300) throw DegeneratePolyline(static_cast<int>(i));
        Vec2 n{d.y, -d.x};  // normal times segment length
        for (const auto& gp : kLineQuad2) {
            Vec2 x = a + d * gp.s;
            Located loc = m.locate(x, hint);
            if (!loc.inside)
                throw OutsideDomain("interface polyline leaves the fluid mesh");
            hint = loc.tri;
            const auto& tr = m.tri(loc.tri);
            const auto& G = m.grads(loc.tri);
            Mat2 Gv;
            for (int j = 0; j < 3; ++j) Gv += Mat2::outer(s.v.values[tr[j]], G[j]);
            double p = m.value_at(s.p, loc);
            Mat2 sigma = Gv.sym() * (2.0 * mat.mu_f) - Mat2::identity() * p;
            force += (sigma * n) * gp.w;
        }
    }
    return force;
}

}  // namespace aimm
