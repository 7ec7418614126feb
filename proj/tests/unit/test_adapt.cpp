#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "aimm/adapt/metric.hpp"
#include "aimm/adapt/remesh.hpp"
#include "aimm/core/quadrature.hpp"

using namespace aimm;

namespace {

// 5-node, 4-triangle "cross": center plus neighbors at +-(h,0), (0,+-h).
TriMesh cross_mesh(Vec2 c, double h) {
    std::vector<Vec2> xy = {c, c + Vec2{h, 0}, c + Vec2{0, h}, c - Vec2{h, 0},
                            c - Vec2{0, h}};
    std::vector<std::array<int, 3>> tris = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}};
    return TriMesh::build(std::move(xy), std::move(tris));
}

// Equilateral triangulation: every interior node has six neighbors at
// distance h, so recovered gradients of quadratics are exact there and all
// interior edges carry the same error for u = x^2 + y^2.
TriMesh equilateral_mesh(double h, int nx, int ny) {
    double dy = h * std::sqrt(3.0) / 2.0;
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Vec2> xy;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            xy.push_back({i * h + (j % 2) * h * 0.5, j * dy});
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (j % 2 == 0) {
                tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    return TriMesh::build(std::move(xy), std::move(tris));
}

ScalarField sample(const TriMesh& m, double (*f)(Vec2)) {
    ScalarField u = m.make_scalar_field();
    for (int n = 0; n < m.n_nodes(); ++n) u.values[n] = f(m.coord(n));
    return u;
}

double quad_xy(Vec2 p) { return p.x * p.x + p.y * p.y; }
double tanh_layer(Vec2 p) { return std::tanh(50.0 * (p.y - p.x)); }

MetricField uniform_metric(const TriMesh& m, double lambda) {
    MetricField mf;
    mf.m.assign(m.n_nodes(), Sym2{lambda, lambda, 0.0});
    mf.gen = m.generation();
    return mf;
}

double cov_of_edge_errors(const TriMesh& m, const ScalarField& u) {
    EdgeErrorField ee = edge_errors(m, u);
    double mean = 0.0;
    for (double e : ee.e) mean += e;
    mean /= ee.e.size();
    double var = 0.0;
    for (double e : ee.e) var += (e - mean) * (e - mean);
    var /= ee.e.size();
    return std::sqrt(var) / mean;
}

// L1 norm of (u - linear interpolant of u) by degree-4 quadrature.
double interp_error_l1(const TriMesh& m, double (*f)(Vec2)) {
    double err = 0.0;
    for (int t = 0; t < m.n_tris(); ++t) {
        const auto& tr = m.tri(t);
        Vec2 a = m.coord(tr[0]), b = m.coord(tr[1]), c = m.coord(tr[2]);
        double fa = f(a), fb = f(b), fc = f(c);
        for (const auto& q : kTriQuad6) {
            Vec2 p = a * q.bary[0] + b * q.bary[1] + c * q.bary[2];
            double lin = fa * q.bary[0] + fb * q.bary[1] + fc * q.bary[2];
            err += q.w * m.area(t) * std::abs(f(p) - lin);
        }
    }
    return err;
}

}  // namespace

TEST_CASE("length distribution tensor on the cross patch") {
    // dyadic coordinates: the arm offsets and their squares are exact
    double h = 0.25;
    TriMesh m = cross_mesh({0.5, 0.25}, h);
    Sym2 X = length_distribution_tensor(m, 0);
    // four arms of length h, averaged: diag(h^2/2, h^2/2) exactly
    CHECK(X.xx == h * h / 2);
    CHECK(X.yy == h * h / 2);
    CHECK(X.xy == 0.0);

    SUBCASE("scaling all coordinates by s multiplies X by s^2") {
        double s = 2.5;
        std::vector<Vec2> xy;
        for (Vec2 p : m.coords()) xy.push_back(p * s);
        TriMesh ms = TriMesh::build(std::move(xy), {m.tris().begin(), m.tris().end()});
        for (int n = 0; n < m.n_nodes(); ++n) {
            Sym2 a = length_distribution_tensor(m, n) * (s * s);
            Sym2 b = length_distribution_tensor(ms, n);
            CHECK(b.xx == doctest::Approx(a.xx).epsilon(1e-14));
            CHECK(b.yy == doctest::Approx(a.yy).epsilon(1e-14));
            CHECK(b.xy == doctest::Approx(a.xy).epsilon(1e-14));
        }
    }
}

TEST_CASE("near-colinear patch is rejected as degenerate") {
    // the center node's neighbors are (+-1, 0) and (0, 1e-5): the length
    // distribution tensor is numerically rank one
    std::vector<Vec2> xy = {{0, 0}, {1, 0}, {-1, 0}, {0, 1e-5}};
    std::vector<std::array<int, 3>> tris = {{0, 1, 3}, {0, 3, 2}};
    TriMesh m = TriMesh::build(std::move(xy), std::move(tris));
    ScalarField u = sample(m, [](Vec2 p) { return p.x + p.y; });
    CHECK_THROWS_AS((void)recover_gradient(m, u, 0), DegeneratePatch);
}

TEST_CASE("gradient recovery is exact on linear and constant fields") {
    TriMesh m = structured_rect(0.0, 0.0, 1.1, 0.8, 5, 4);
    ScalarField lin = sample(m, [](Vec2 p) { return 3.0 * p.x + 2.0 * p.y; });
    std::vector<Vec2> G = recover_gradients(m, lin);
    for (Vec2 g : G) {
        CHECK(g.x == doctest::Approx(3.0).epsilon(1e-10));
        CHECK(g.y == doctest::Approx(2.0).epsilon(1e-10));
    }

    ScalarField cst = sample(m, [](Vec2) { return 4.25; });
    for (Vec2 g : recover_gradients(m, cst)) {
        CHECK(g.x == 0.0);
        CHECK(g.y == 0.0);
    }

    SUBCASE("stale field is refused") {
        TriMesh other = structured_rect(0.0, 0.0, 1.0, 1.0, 5, 4);
        CHECK_THROWS_AS((void)recover_gradients(other, lin), StaleField);
    }
}

TEST_CASE("gradient recovery of x^2 on a cross patch hits the exact center gradient") {
    double x0 = 0.5, h = 0.25;
    TriMesh m = cross_mesh({x0, 0.25}, h);
    ScalarField u = sample(m, [](Vec2 p) { return p.x * p.x; });
    Vec2 g = recover_gradient(m, u, 0);
    // the h^2 terms of U^{ij} cancel between the +x and -x arms; the patch
    // tensor regularization perturbs the inverse at the 1e-12 level
    CHECK(g.x == doctest::Approx(2.0 * x0).epsilon(1e-10));
    CHECK(g.y == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("edge errors: second difference along the edge") {
    int k = 8;
    double h = 1.0 / k;
    TriMesh m = structured_rect(0.0, 0.0, 1.0, 1.0, k, k);

    ScalarField ux2 = sample(m, [](Vec2 p) { return p.x * p.x; });
    ScalarField uy2 = sample(m, [](Vec2 p) { return p.y * p.y; });
    ScalarField lin = sample(m, [](Vec2 p) { return 0.4 * p.x - 1.3 * p.y; });
    EdgeErrorField ex = edge_errors(m, ux2);
    EdgeErrorField ey = edge_errors(m, uy2);
    EdgeErrorField el = edge_errors(m, lin);

    int checked = 0;
    for (int e = 0; e < m.n_edges(); ++e) {
        const MeshEdge& ed = m.edges()[e];
        if (m.patch_of(ed.a).on_boundary || m.patch_of(ed.b).on_boundary) continue;
        Vec2 d = m.coord(ed.b) - m.coord(ed.a);
        if (std::abs(d.y) < 1e-14) {
            // x-directed edge: u = x^2 bends by u'' h^2 = 2h^2, y^2 not at all
            CHECK(ex.e[e] == doctest::Approx(2.0 * h * h).epsilon(1e-10));
            CHECK(ey.e[e] == doctest::Approx(0.0).epsilon(1e-12));
            ++checked;
        }
        CHECK(el.e[e] <= 1e-12);
    }
    CHECK(checked >= 20);
}

TEST_CASE("metric edge length") {
    double h = 0.125;
    Sym2 M{1.0 / (h * h), 1.0 / (h * h), 0.0};
    CHECK(metric_edge_length({0, 0}, {h, 0}, M, M) == doctest::Approx(1.0).epsilon(1e-14));
    // anisotropic target: unit length along each axis at its own h
    Sym2 A{1.0 / 0.04, 1.0 / 0.25, 0.0};
    CHECK(metric_edge_length({0, 0}, {0.2, 0}, A, A) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(metric_edge_length({0, 0}, {0, 0.5}, A, A) == doctest::Approx(1.0).epsilon(1e-14));
    // endpoint average
    Sym2 B = A * 3.0;
    CHECK(metric_edge_length({0, 0}, {0.2, 0}, A, B) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("metric quality: affine images of the equilateral triangle score 1") {
    Vec2 a{0, 0}, b{1, 0}, c{0.5, std::sqrt(3.0) / 2.0};
    Sym2 I = Sym2::identity();
    CHECK(metric_quality(a, b, c, I, I, I) == doctest::Approx(1.0).epsilon(1e-12));

    // stretch x by 8, measure in the matching metric: still ideal
    double L = 8.0;
    Vec2 bs{b.x * L, 0}, cs{c.x * L, c.y};
    Sym2 M{1.0 / (L * L), 1.0, 0.0};
    CHECK(metric_quality(a, bs, cs, M, M, M) == doctest::Approx(1.0).epsilon(1e-9));

    // right isoceles in the identity metric: 4*sqrt(3)*(1/2) / (1+1+2)
    CHECK(metric_quality({0, 0}, {1, 0}, {0, 1}, I, I, I) ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));

    // inverted orientation scores negative
    CHECK(metric_quality({0, 0}, {0, 1}, {1, 0}, I, I, I) < 0.0);
}

TEST_CASE("metric intersection dominates both arguments") {
    Sym2 A{4.0, 1.0, 0.0}, B{1.0, 4.0, 0.0};
    Sym2 M = metric_intersection(A, B);
    CHECK(M.xx == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(M.yy == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(M.xy == doctest::Approx(0.0).epsilon(1e-12));

    Sym2 S = metric_intersection(A, A);
    CHECK(S.xx == doctest::Approx(A.xx).epsilon(1e-12));
    CHECK(S.yy == doctest::Approx(A.yy).epsilon(1e-12));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ang(0.0, 3.141592653589793);
    std::uniform_real_distribution<double> lam(0.1, 10.0);
    for (int trial = 0; trial < 40; ++trial) {
        Sym2 P = Sym2::from_eigen(lam(rng), lam(rng), {std::cos(ang(rng)), std::sin(ang(rng))});
        Sym2 Q = Sym2::from_eigen(lam(rng), lam(rng), {std::cos(ang(rng)), std::sin(ang(rng))});
        Sym2 R = metric_intersection(P, Q);
        CHECK(R.det() > 0.0);
        CHECK(R.xx > 0.0);
        for (int k = 0; k < 16; ++k) {
            double th = k * 3.141592653589793 / 8.0;
            Vec2 v{std::cos(th), std::sin(th)};
            double rv = R.quad(v);
            CHECK(rv >= P.quad(v) * (1.0 - 1e-9));
            CHECK(rv >= Q.quad(v) * (1.0 - 1e-9));
        }
    }
}

TEST_CASE("build_metric equidistributes: edges measure 1/s at the returned error level") {
    // equilateral grid: interior edge errors of x^2+y^2 are all 2h^2, so the
    // stretching is uniform where both patches are interior
    double h = 0.1;
    TriMesh m = equilateral_mesh(h, 16, 14);
    ScalarField u = sample(m, quad_xy);

    MetricOpts opts;
    opts.target_nodes = 4 * m.n_nodes();
    opts.h_min = 1e-4;
    opts.h_max = 10.0;
    MetricResult r = build_metric(m, {&u}, opts);
    CHECK(r.target_reached);
    CHECK(r.e_target > 0.0);
    CHECK(std::abs(r.predicted_nodes - opts.target_nodes) <= 0.05 * opts.target_nodes);

    // a node's tensor averages the stretches of all its incident edges, so
    // the 1/s law is exact only where the whole one-ring is interior (edges
    // touching boundary nodes carry one-sided recovery errors)
    std::vector<char> interior(m.n_nodes(), 1);
    for (int n = 0; n < m.n_nodes(); ++n)
        if (m.patch_of(n).on_boundary) interior[n] = 0;
    std::vector<char> deep = interior;
    for (const MeshEdge& ed : m.edges())
        if (!interior[ed.a] || !interior[ed.b]) deep[ed.a] = deep[ed.b] = 0;

    EdgeErrorField ee = edge_errors(m, u);
    int checked = 0;
    for (int e = 0; e < m.n_edges(); ++e) {
        const MeshEdge& ed = m.edges()[e];
        if (!deep[ed.a] || !deep[ed.b]) continue;
        double s = std::sqrt(r.e_target / ee.e[e]);
        double len = metric_edge_length(m.coord(ed.a), m.coord(ed.b),
                                        r.metric.m[ed.a], r.metric.m[ed.b]);
        CHECK(len == doctest::Approx(1.0 / s).epsilon(1e-6));
        ++checked;
    }
    CHECK(checked >= 100);

    SUBCASE("quadrupling the node budget halves every target length") {
        MetricOpts o2 = opts;
        o2.target_nodes = m.n_nodes();
        MetricResult r1 = build_metric(m, {&u}, o2);
        // s scales like sqrt(e_target); budgets 4N vs N give s ratio 1/2, so
        // the metric tensors quadruple (up to bisection slack on both sides)
        for (int n = 0; n < m.n_nodes(); ++n) {
            if (m.patch_of(n).on_boundary) continue;
            CHECK(r.metric.m[n].xx ==
                  doctest::Approx(4.0 * r1.metric.m[n].xx).epsilon(0.12));
            CHECK(r.metric.m[n].yy ==
                  doctest::Approx(4.0 * r1.metric.m[n].yy).epsilon(0.12));
        }
    }
}

TEST_CASE("build_metric with zero error: isotropic h_max everywhere, budget unreachable") {
    TriMesh m = structured_rect(0.0, 0.0, 1.0, 1.0, 16, 16);
    ScalarField u = sample(m, [](Vec2) { return 7.0; });
    MetricOpts opts;
    opts.target_nodes = 2000;
    opts.h_max = 0.1;
    MetricResult r = build_metric(m, {&u}, opts);
    CHECK_FALSE(r.target_reached);
    CHECK(!r.warning.empty());
    CHECK(r.predicted_nodes < opts.target_nodes);
    for (const Sym2& mm : r.metric.m) {
        CHECK(mm.xx == doctest::Approx(100.0).epsilon(1e-9));
        CHECK(mm.yy == doctest::Approx(100.0).epsilon(1e-9));
        CHECK(mm.xy == doctest::Approx(0.0).epsilon(1e-6));
    }
}

TEST_CASE("build_metric input validation") {
    TriMesh m = structured_rect(0.0, 0.0, 1.0, 1.0, 4, 4);
    ScalarField u = sample(m, quad_xy);
    MetricOpts opts;
    opts.target_nodes = 0;
    CHECK_THROWS_AS((void)build_metric(m, {&u}, opts), Error);
    opts.target_nodes = 50;
    CHECK_THROWS_AS((void)build_metric(m, {}, opts), Error);
    opts.h_min = 0.5;
    opts.h_max = 0.1;
    CHECK_THROWS_AS((void)build_metric(m, {&u}, opts), Error);
}

TEST_CASE("steep layer: dominant metric direction crosses the layer") {
    // Recovering a direction needs edges that sample it: rotate an
    // equilateral lattice by 45 degrees so one edge family runs along the
    // layer y = x and the patches are mirror-symmetric about its normal.
    double h = 0.03;
    TriMesh lat = equilateral_mesh(h, 60, 66);
    Vec2 mid = lat.coord(33 * 61 + 30);  // a lattice node on row 33
    double c = std::sqrt(0.5);
    std::vector<Vec2> xy(lat.n_nodes());
    for (int n = 0; n < lat.n_nodes(); ++n) {
        Vec2 d = lat.coord(n) - mid;
        xy[n] = {0.5 + c * (d.x - d.y), 0.5 + c * (d.x + d.y)};
    }
    TriMesh m = lat.with_coords(std::move(xy));

    ScalarField u = sample(m, tanh_layer);
    MetricOpts opts;
    opts.target_nodes = m.n_nodes();
    opts.h_max = 1.0;
    MetricResult r = build_metric(m, {&u}, opts);

    Vec2 want{1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
    double cos10 = std::cos(10.0 * 3.141592653589793 / 180.0);
    int in_layer = 0, aligned = 0;
    for (int n = 0; n < m.n_nodes(); ++n) {
        Vec2 p = m.coord(n);
        if (std::abs(p.y - p.x) > 0.04) continue;
        if (m.patch_of(n).on_boundary) continue;
        ++in_layer;
        double l1, l2;
        Vec2 v1, v2;
        r.metric.m[n].eigen(l1, l2, v1, v2);
        CHECK(l1 > l2);  // genuinely anisotropic in the layer
        if (std::abs(v1.dot(want)) >= cos10) ++aligned;
    }
    CHECK(in_layer >= 100);
    CHECK(aligned >= (in_layer * 9) / 10);
}

TEST_CASE("remesh fixed point: unit metric on a uniform mesh changes nothing") {
    TriMesh m = structured_rect(0.0, 0.0, 1.0, 1.0, 16, 16);
    double h = 1.0 / 16;
    MetricField mf = uniform_metric(m, 1.0 / (h * h));
    RemeshResult r = remesh_to_metric(m, mf);
    CHECK(r.mesh.n_nodes() == m.n_nodes());
    CHECK(r.splits == 0);
    CHECK(r.collapses == 0);
    CHECK(r.flips == 0);
    CHECK(r.sweeps == 1);
    CHECK_FALSE(r.stalled);
    CHECK(r.min_quality > 0.5);

    SUBCASE("stale metric is refused") {
        TriMesh other = structured_rect(0.0, 0.0, 1.0, 1.0, 16, 16);
        CHECK_THROWS_AS((void)remesh_to_metric(other, mf), StaleField);
    }
}

TEST_CASE("remesh refinement: metric 4/h^2 quadruples the node count") {
    TriMesh m = structured_rect(0.0, 0.0, 1.0, 1.0, 16, 16);
    double h = 1.0 / 16;
    MetricField mf = uniform_metric(m, 4.0 / (h * h));
    RemeshResult r = remesh_to_metric(m, mf);
    double ratio = double(r.mesh.n_nodes()) / m.n_nodes();
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
    CHECK(r.splits > 0);
    CHECK_FALSE(r.stalled);

    // rectangle corners and axis-aligned boundary survive exactly
    int corners = 0;
    for (Vec2 p : r.mesh.coords())
        if ((p.x == 0.0 || p.x == 1.0) && (p.y == 0.0 || p.y == 1.0)) ++corners;
    CHECK(corners == 4);
    for (const auto& [key, tag] : r.mesh.boundary_tags()) {
        Vec2 d = r.mesh.coord(key.second) - r.mesh.coord(key.first);
        CHECK((d.x == 0.0 || d.y == 0.0));
        CHECK(tag >= btag::kLeft);
        CHECK(tag <= btag::kTop);
    }
}

TEST_CASE("remesh coarsening: metric for 2h cuts the node count near 4x") {
    TriMesh m = structured_rect(0.0, 0.0, 1.0, 1.0, 16, 16);
    double h = 1.0 / 16;
    MetricField mf = uniform_metric(m, 0.25 / (h * h));
    RemeshResult r = remesh_to_metric(m, mf);
    double ratio = double(m.n_nodes()) / r.mesh.n_nodes();
    CHECK(ratio >= 2.5);
    CHECK(ratio <= 6.0);
    CHECK(r.collapses > 0);

    // corners are never collapsed away (their boundary edges carry
    // different tags), boundaries stay axis aligned
    int corners = 0;
    for (Vec2 p : r.mesh.coords())
        if ((p.x == 0.0 || p.x == 1.0) && (p.y == 0.0 || p.y == 1.0)) ++corners;
    CHECK(corners == 4);
    for (const auto& [key, tag] : r.mesh.boundary_tags()) {
        Vec2 d = r.mesh.coord(key.second) - r.mesh.coord(key.first);
        CHECK((d.x == 0.0 || d.y == 0.0));
    }
}

TEST_CASE("field transfer across a remesh") {
    TriMesh m = structured_rect(0.0, 0.0, 1.0, 1.0, 12, 12);
    double h = 1.0 / 12;
    MetricField mf = uniform_metric(m, 4.0 / (h * h));
    RemeshResult r = remesh_to_metric(m, mf);
    REQUIRE(r.mesh.n_nodes() > m.n_nodes());

    ScalarField lin = sample(m, [](Vec2 p) { return 1.7 * p.x - 0.9 * p.y + 0.3; });
    ScalarField out = transfer_field(m, lin, r.mesh);
    CHECK(out.gen == r.mesh.generation());
    for (int n = 0; n < r.mesh.n_nodes(); ++n) {
        Vec2 p = r.mesh.coord(n);
        CHECK(out.values[n] ==
              doctest::Approx(1.7 * p.x - 0.9 * p.y + 0.3).epsilon(1e-12));
    }

    VectorField vlin = m.make_vector_field();
    for (int n = 0; n < m.n_nodes(); ++n) {
        Vec2 p = m.coord(n);
        vlin.values[n] = {0.2 * p.x + p.y, -p.x + 0.5};
    }
    VectorField vout = transfer_field(m, vlin, r.mesh);
    for (int n = 0; n < r.mesh.n_nodes(); ++n) {
        Vec2 p = r.mesh.coord(n);
        CHECK(vout.values[n].x == doctest::Approx(0.2 * p.x + p.y).epsilon(1e-12));
        CHECK(vout.values[n].y == doctest::Approx(-p.x + 0.5).epsilon(1e-12));
    }

    SUBCASE("a node outside the donor is a transfer miss") {
        TriMesh big = structured_rect(0.0, 0.0, 2.0, 2.0, 4, 4);
        CHECK_THROWS_AS((void)transfer_field(m, lin, big), TransferMiss);
    }
    SUBCASE("stale donor field is refused") {
        ScalarField stale = r.mesh.make_scalar_field();
        CHECK_THROWS_AS((void)transfer_field(m, stale, r.mesh), StaleField);
    }
}

TEST_CASE("remesh reports a stall instead of throwing") {
    TriMesh m = structured_rect(0.0, 0.0, 1.0, 1.0, 8, 8);
    double h = 1.0 / 8;

    SUBCASE("quality floor set impossibly high") {
        RemeshOpts opts;
        opts.min_quality = 0.99;
        RemeshResult r = remesh_to_metric(m, uniform_metric(m, 1.0 / (h * h)), opts);
        CHECK(r.stalled);
        CHECK(!r.warning.empty());
        CHECK(r.mesh.n_nodes() == m.n_nodes());
    }
    SUBCASE("sweep budget too small for a big refinement") {
        // an 8x refinement cannot settle in one sweep: that is reported as a
        // warning, not a stall (only a quality collapse stalls)
        RemeshOpts opts;
        opts.max_sweeps = 1;
        RemeshResult r = remesh_to_metric(m, uniform_metric(m, 64.0 / (h * h)), opts);
        CHECK_FALSE(r.stalled);
        CHECK(!r.warning.empty());
        CHECK(r.mesh.n_nodes() > m.n_nodes());
    }
}

TEST_CASE("node budget: adapted count within 10% when no clamp is active") {
    // smooth isotropic curvature, stretching well inside [s_min, s_max] and
    // target sizes well inside [h_min, h_max]
    TriMesh m = structured_rect(0.0, 0.0, 1.0, 1.0, 24, 24);
    ScalarField u = sample(m, quad_xy);
    MetricOpts mo;
    mo.target_nodes = 2 * m.n_nodes();
    mo.h_min = 1e-4;
    mo.h_max = 1.0;
    MetricResult mr = build_metric(m, {&u}, mo);
    CHECK(mr.target_reached);
    RemeshResult rr = remesh_to_metric(m, mr.metric);
    CHECK_FALSE(rr.stalled);
    CHECK(std::abs(rr.mesh.n_nodes() - mo.target_nodes) <= 0.10 * mo.target_nodes);
}

TEST_CASE("adapting to the tanh layer: equidistribution and interpolation win") {
    TriMesh uni = structured_rect(0.0, 0.0, 1.0, 1.0, 32, 32);
    int target = uni.n_nodes();

    TriMesh adapted = uni;
    RemeshResult rr;
    for (int pass = 0; pass < 3; ++pass) {
        ScalarField u = sample(adapted, tanh_layer);
        MetricOpts mo;
        mo.target_nodes = target;
        mo.h_min = 1e-4;
        mo.h_max = 0.5;
        MetricResult mr = build_metric(adapted, {&u}, mo);
        RemeshOpts ro;
        ro.target_nodes = target;
        rr = remesh_to_metric(adapted, mr.metric, ro);
        adapted = rr.mesh;
    }
    CHECK_FALSE(rr.stalled);
    CHECK(rr.min_quality > 0.1);

    CHECK(std::abs(adapted.n_nodes() - target) <= 0.10 * target);

    // uniform reference with (nearly) the same node count
    int k = int(std::lround(std::sqrt(double(adapted.n_nodes())))) - 1;
    TriMesh ref = structured_rect(0.0, 0.0, 1.0, 1.0, k, k);

    // error equidistribution: coefficient of variation of the edge errors
    // drops by at least 30%
    ScalarField ua = sample(adapted, tanh_layer);
    ScalarField ur = sample(ref, tanh_layer);
    double cov_a = cov_of_edge_errors(adapted, ua);
    double cov_r = cov_of_edge_errors(ref, ur);
    CHECK(cov_a <= 0.7 * cov_r);

    // the anisotropy pays: L1 interpolation error at equal node count
    double e_a = interp_error_l1(adapted, tanh_layer);
    double e_r = interp_error_l1(ref, tanh_layer);
    CHECK(e_a <= 0.7 * e_r);
}

TEST_CASE("adaptation statistics CSV") {
    std::string path = "adapt_stats_test.csv";
    std::remove(path.c_str());
    TriMesh m = structured_rect(0.0, 0.0, 1.0, 1.0, 8, 8);
    double h = 1.0 / 8;
    RemeshResult r = remesh_to_metric(m, uniform_metric(m, 1.0 / (h * h)));
    append_adapt_stats_csv(path, 3, 0.75, r);
    append_adapt_stats_csv(path, 4, 1.0, r);

    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line ==
          "step,time,nodes,tris,sweeps,splits,collapses,flips,min_quality,"
          "max_quality,stalled");
    REQUIRE(std::getline(in, line));
    CHECK(line.substr(0, 7) == "3,0.75,");
    REQUIRE(std::getline(in, line));
    CHECK(line.substr(0, 4) == "4,1,");
    CHECK_FALSE(std::getline(in, line));
    std::remove(path.c_str());
}
