#include "aimm/interface/coupling.hpp"

#include <cmath>

#include "aimm/core/errors.hpp"
#include "aimm/core/quadrature.hpp"

namespace aimm {

namespace {

// mean incident edge length per node, the "local h" used as transfer slack
std::vector<double> node_sizes(const TriMesh& m) {
    std::vector<double> acc(m.n_nodes(), 0.0);
    std::vector<int> cnt(m.n_nodes(), 0);
    for (const auto& e : m.edges()) {
        double len = (m.coord(e.b) - m.coord(e.a)).norm();
        acc[e.a] += len;
        acc[e.b] += len;
        ++cnt[e.a];
        ++cnt[e.b];
    }
    for (int n = 0; n < m.n_nodes(); ++n)
        if (cnt[n] > 0) acc[n] /= cnt[n];
    return acc;
}

Vec2 interp_velocity(const SolidState& solid, const Located& loc) {
    const auto& tr = solid.mesh.tri(loc.tri);
    return solid.v[tr[0]] * loc.bary[0] + solid.v[tr[1]] * loc.bary[1] +
           solid.v[tr[2]] * loc.bary[2];
}

}  // namespace

std::vector<std::pair<int, Vec2>> velocity_continuity(const TriMesh& fluid_mesh,
                                                      const LevelSet& ls,
                                                      const SolidState& solid) {
    if (ls.alpha.gen != fluid_mesh.generation())
        throw StaleField(ls.alpha.gen, fluid_mesh.generation());
    if (static_cast<int>(solid.v.size()) != solid.mesh.n_nodes())
        throw Error("velocity_continuity: solid velocity size mismatch");
    std::vector<double> h = node_sizes(fluid_mesh);
    std::vector<std::pair<int, Vec2>> out;
    int hint = -1;
    for (int n = 0; n < fluid_mesh.n_nodes(); ++n) {
        if (!(ls.alpha.values[n] <= 0.0)) continue;
        Vec2 p = fluid_mesh.coord(n);
        Located loc = solid.mesh.locate(p, hint);
        if (!loc.inside) {
            // flagged inside the body but off the solid mesh: accept within
            // one local mesh size, taking the nearest boundary value
            if ((p - loc.nearest).norm() > h[n]) throw TransferMiss(n);
            loc = solid.mesh.locate(loc.nearest, hint);
            if (!loc.inside) throw TransferMiss(n);
        }
        hint = loc.tri;
        out.push_back({n, interp_velocity(solid, loc)});
    }
    return out;
}

void impose_velocity_continuity(FluidBCs& bcs, const TriMesh& fluid_mesh, const LevelSet& ls,
                                const SolidState& solid) {
    bcs.immersed = velocity_continuity(fluid_mesh, ls, solid);
}

std::vector<TractionSample> extract_traction(const FluidState& fs, const FluidMaterial& mat,
                                             const InterfacePolyline& poly,
                                             const std::set<int>& exclude_tags) {
    poly.validate();
    const TriMesh& m = fs.mesh;
    if (fs.v.gen != m.generation() || fs.p.gen != m.generation())
        throw StaleField(fs.v.gen, m.generation());
    std::vector<TractionSample> out;
    out.reserve(2 * poly.n_segments());
    int hint = -1;
    for (int i = 0; i < poly.n_segments(); ++i) {
        if (exclude_tags.count(poly.seg_tags[i])) continue;
        Vec2 a = poly.a(i), d = poly.b(i) - a;
        double len = d.norm();
        Vec2 nrm = poly.normal(i);
        for (const auto& gp : kLineQuad2) {
            Vec2 x = a + d * gp.s;
            Located loc = m.locate(x, hint);
            if (!loc.inside) throw OutsideDomain("interface sample outside the fluid mesh");
            hint = loc.tri;
            double p = m.value_at(fs.p, loc);
            // shear from the first element on the fluid side of the segment
            Vec2 xoff = x + nrm * (0.1 * m.altitude(loc.tri));
            Located off = m.locate(xoff, hint);
            if (!off.inside)
                throw OutsideDomain("fluid-side offset sample outside the fluid mesh");
            const auto& tr = m.tri(off.tri);
            const auto& G = m.grads(off.tri);
            Mat2 Gv;
            for (int j = 0; j < 3; ++j) Gv += Mat2::outer(fs.v.values[tr[j]], G[j]);
            Mat2 sigma = Gv.sym() * (2.0 * mat.mu_f) - Mat2::identity() * p;
            out.push_back({i, gp.s, x, sigma * nrm, gp.w * len});
        }
    }
    return out;
}

std::vector<Vec2> traction_nodal_loads(int n_solid_nodes, const InterfacePolyline& poly,
                                       std::span<const TractionSample> samples) {
    std::vector<Vec2> loads(n_solid_nodes);
    for (const auto& smp : samples) {
        auto [na, nb] = poly.seg_nodes[smp.seg];
        if (na < 0 || nb < 0 || na >= n_solid_nodes || nb >= n_solid_nodes)
            throw Error("traction_nodal_loads: polyline has no source-node ids");
        loads[na] += smp.t * (smp.w * (1.0 - smp.s));
        loads[nb] += smp.t * (smp.w * smp.s);
    }
    return loads;
}

Vec2 total_sample_force(std::span<const TractionSample> samples) {
    Vec2 f{};
    for (const auto& smp : samples) f += smp.t * smp.w;
    return f;
}

}  // namespace aimm
