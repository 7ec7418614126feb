#include "aimm/adapt/metric.hpp"

#include <algorithm>
#include <cmath>

#include "aimm/core/errors.hpp"

namespace aimm {

namespace {

// X + 1e-12 tr(X) I, inverted; throws if the patch is rank-deficient even so
Sym2 invert_patch_tensor(Sym2 X, int node) {
    double tr = X.trace();
    X.xx += 1e-12 * tr;
    X.yy += 1e-12 * tr;
    if (!(X.det() > 1e-9 * tr * tr)) throw DegeneratePatch(node);
    return X.inverse();
}

}  // namespace

Sym2 length_distribution_tensor(const TriMesh& m, int node) {
    const Patch& patch = m.patch_of(node);
    if (patch.nodes.empty()) throw DegeneratePatch(node);
    Sym2 X;
    Vec2 xi = m.coord(node);
    for (int j : patch.nodes) X += Sym2::outer(m.coord(j) - xi);
    return X * (1.0 / patch.nodes.size());
}

Vec2 recover_gradient(const TriMesh& m, const ScalarField& f, int node) {
    if (f.gen != m.generation() || f.values.size() != static_cast<std::size_t>(m.n_nodes()))
        throw StaleField(f.gen, m.generation());
    const Patch& patch = m.patch_of(node);
    if (patch.nodes.empty()) throw DegeneratePatch(node);
    Sym2 X;
    Vec2 b{};
    Vec2 xi = m.coord(node);
    double ui = f.values[node];
    for (int j : patch.nodes) {
        Vec2 d = m.coord(j) - xi;
        X += Sym2::outer(d);
        b += d * (f.values[j] - ui);
    }
    double inv = 1.0 / patch.nodes.size();
    return invert_patch_tensor(X * inv, node) * (b * inv);
}

std::vector<Vec2> recover_gradients(const TriMesh& m, const ScalarField& f) {
    std::vector<Vec2> g(m.n_nodes());
    for (int n = 0; n < m.n_nodes(); ++n) g[n] = recover_gradient(m, f, n);
    return g;
}

EdgeErrorField edge_errors(const TriMesh& m, const ScalarField& f) {
    std::vector<Vec2> g = recover_gradients(m, f);
    EdgeErrorField out;
    out.e.reserve(m.n_edges());
    for (const auto& e : m.edges())
        out.e.push_back(std::abs((g[e.b] - g[e.a]).dot(m.coord(e.b) - m.coord(e.a))));
    return out;
}

double metric_edge_length(Vec2 xa, Vec2 xb, const Sym2& Ma, const Sym2& Mb) {
    Vec2 d = xb - xa;
    return std::sqrt(std::max(0.0, 0.5 * (Ma.quad(d) + Mb.quad(d))));
}

Sym2 metric_intersection(const Sym2& A, const Sym2& B) {
    double a1, a2;
    Vec2 u1, u2;
    A.eigen(a1, a2, u1, u2);
    a1 = std::max(a1, 1e-300);
    a2 = std::max(a2, 1e-300);
    double r1 = std::sqrt(a1), r2 = std::sqrt(a2);
    Sym2 Ah = Sym2::from_eigen(r1, r2, u1);          // A^{1/2}
    Sym2 Ahi = Sym2::from_eigen(1.0 / r1, 1.0 / r2, u1);  // A^{-1/2}
    Sym2 C = Sym2::from(Ahi.full() * B.full() * Ahi.full());
    double c1, c2;
    Vec2 w1, w2;
    C.eigen(c1, c2, w1, w2);
    Sym2 D = Sym2::from_eigen(std::max(c1, 1.0), std::max(c2, 1.0), w1);
    return Sym2::from(Ah.full() * D.full() * Ah.full());
}

namespace {

std::vector<double> stretch_factors(const EdgeErrorField& errs, double e_target,
                                    const MetricOpts& o) {
    // Edge errors far below the field's own scale are roundoff from the
    // gradient recovery, not signal; treat them like exact zeros so a deep
    // bisection can never ask for refinement along a symmetry direction.
    double floor = 0.0;
    for (double e : errs.e) floor = std::max(floor, e);
    floor *= 1e-12;
    std::vector<double> s(errs.e.size());
    for (std::size_t k = 0; k < errs.e.size(); ++k) {
        double e = errs.e[k];
        double raw;
        if (o.printed_stretching)
            raw = e > floor ? e / e_target : o.s_max;
        else
            raw = e > floor ? std::sqrt(e_target / e) : o.s_max;
        s[k] = std::clamp(raw, o.s_min, o.s_max);
    }
    return s;
}

Sym2 clamp_eigen(Sym2 M, double lo, double hi) {
    double l1, l2;
    Vec2 v1, v2;
    M.eigen(l1, l2, v1, v2);
    return Sym2::from_eigen(std::clamp(l1, lo, hi), std::clamp(l2, lo, hi), v1);
}

// Full per-node metric for one criterion at error level e_target: stretched
// second moments, regularized inverse, eigenvalue clamps.
std::vector<Sym2> metric_for_level(const TriMesh& m, const EdgeErrorField& errs,
                                   double e_target, const MetricOpts& o,
                                   double lam_lo, double lam_hi) {
    std::vector<double> s = stretch_factors(errs, e_target, o);
    std::vector<Sym2> X(m.n_nodes());
    std::vector<int> cnt(m.n_nodes(), 0);
    const auto& edges = m.edges();
    for (std::size_t k = 0; k < edges.size(); ++k) {
        Vec2 d = m.coord(edges[k].b) - m.coord(edges[k].a);
        Sym2 contrib = Sym2::outer(d) * (s[k] * s[k]);
        X[edges[k].a] += contrib;
        X[edges[k].b] += contrib;
        ++cnt[edges[k].a];
        ++cnt[edges[k].b];
    }
    std::vector<Sym2> M(m.n_nodes());
    for (int n = 0; n < m.n_nodes(); ++n) {
        if (cnt[n] == 0) throw DegeneratePatch(n);
        // the 1/2 makes an ideal isotropic patch (where the directional
        // average of cos^2 is 1/2) measure its own edges at metric length 1,
        // so an edge stretched by s comes out at length 1/s
        Sym2 Mn = invert_patch_tensor(X[n] * (1.0 / cnt[n]), n) * 0.5;
        M[n] = clamp_eigen(Mn, lam_lo, lam_hi);
    }
    return M;
}

// Node count of the unit mesh of a metric. Per node the patch needs
// sqrt(det M) nodes per unit area times the patch's own area measure; with
// X the length-distribution tensor of the patch that is 2*sqrt(det M det X).
// Both factors transform with the full eigenvalue product, so anisotropy
// enters exactly as sqrt(det M) no matter how the donor edges are aligned,
// and the donor lattice's packing constant (1 on equilateral patches,
// 2/sqrt(3) on structured ones) cancels once adaptation reaches its fixed
// point and donor and output share the same lattice shape.
double predicted_node_count(const TriMesh& m, const std::vector<Sym2>& M,
                            const std::vector<double>& det_x) {
    double total = 0.0;
    for (int n = 0; n < m.n_nodes(); ++n) {
        double d = M[n].det() * det_x[n];
        if (d > 0.0) total += 2.0 * std::sqrt(d);
    }
    return total;
}

std::vector<double> patch_det(const TriMesh& m) {
    std::vector<double> det_x(m.n_nodes());
    for (int n = 0; n < m.n_nodes(); ++n)
        det_x[n] = std::max(length_distribution_tensor(m, n).det(), 0.0);
    return det_x;
}

}  // namespace

MetricResult build_metric(const TriMesh& m, const std::vector<const ScalarField*>& criteria,
                          const MetricOpts& opts) {
    if (criteria.empty()) throw Error("build_metric: no criterion fields");
    if (opts.target_nodes <= 0) throw Error("build_metric: target_nodes must be positive");
    if (!(opts.h_min > 0.0) || !(opts.h_max >= opts.h_min))
        throw Error("build_metric: need 0 < h_min <= h_max");

    const double lam_lo = 1.0 / (opts.h_max * opts.h_max);
    const double lam_hi = 1.0 / (opts.h_min * opts.h_min);
    const double N = opts.target_nodes;

    MetricResult res;
    res.metric.gen = m.generation();
    const std::vector<double> det_x = patch_det(m);

    bool first = true;
    for (const ScalarField* f : criteria) {
        EdgeErrorField errs = edge_errors(m, *f);

        // Bisect the error level on the node count the finished metric
        // (blending and clamps included) actually asks for: raising the
        // level coarsens, lowering it refines.
        double lo = 1e-30, hi = 1e30;
        double et = 1.0, best_et = 1.0, best_gap = 1e300;
        std::vector<Sym2> M;
        for (int it = 0; it < 120; ++it) {
            et = std::sqrt(lo * hi);
            M = metric_for_level(m, errs, et, opts, lam_lo, lam_hi);
            double pred = predicted_node_count(m, M, det_x);
            if (std::abs(pred - N) < best_gap) {
                best_gap = std::abs(pred - N);
                best_et = et;
            }
            if (std::abs(pred - N) <= opts.node_tol * N) break;
            (pred > N ? lo : hi) = et;
        }
        if (et != best_et) M = metric_for_level(m, errs, best_et, opts, lam_lo, lam_hi);
        errs.target = best_et;
        res.e_target = best_et;
        if (best_gap > opts.node_tol * N) {
            res.target_reached = false;
            res.warning = "stretching/size clamps prevent reaching the node budget";
        }

        if (first) {
            res.metric.m = std::move(M);
        } else {
            for (int n = 0; n < m.n_nodes(); ++n)
                res.metric.m[n] = metric_intersection(res.metric.m[n], M[n]);
        }
        first = false;
    }

    // intersection can push past the clamps; enforce them on the result
    if (criteria.size() > 1)
        for (Sym2& Mn : res.metric.m) Mn = clamp_eigen(Mn, lam_lo, lam_hi);

    res.predicted_nodes = predicted_node_count(m, res.metric.m, det_x);
    return res;
}

}  // namespace aimm
