#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "aimm/interface/coupling.hpp"
#include "aimm/interface/levelset.hpp"

using namespace aimm;

namespace {

InterfacePolyline unit_circle(int nseg, double r = 1.0, Vec2 c = {}) {
    std::vector<Vec2> pts;
    for (int k = 0; k < nseg; ++k) {
        double th = 2.0 * M_PI * k / nseg;
        pts.push_back(c + Vec2{r * std::cos(th), r * std::sin(th)});
    }
    return InterfacePolyline::from_points(std::move(pts), true);
}

SolidState square_solid(double lo, double hi, int k) {
    SolidState s;
    s.mesh = structured_rect(lo, lo, hi, hi, k, k);
    s.X.assign(s.mesh.coords().begin(), s.mesh.coords().end());
    s.u.assign(s.mesh.n_nodes(), Vec2{});
    s.v.assign(s.mesh.n_nodes(), Vec2{});
    s.a.assign(s.mesh.n_nodes(), Vec2{});
    s.p.assign(s.mesh.n_nodes(), 0.0);
    return s;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("polyline basics: square loop normals, lengths, validation") {
    auto sq = InterfacePolyline::from_points({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true);
    CHECK(sq.n_segments() == 4);
    CHECK(sq.length() == doctest::Approx(4.0));
    // CCW travel, normals point away from the enclosed body
    CHECK(sq.normal(0).y == doctest::Approx(-1.0));
    CHECK(sq.normal(1).x == doctest::Approx(1.0));
    CHECK(sq.normal(2).y == doctest::Approx(1.0));
    CHECK(sq.normal(3).x == doctest::Approx(-1.0));

    CHECK_THROWS_AS(InterfacePolyline::from_points({{0, 0}, {0, 0}, {1, 1}}, true),
                    DegeneratePolyline);
    CHECK_THROWS_AS(InterfacePolyline::from_points({{0, 0}, {1, 1}}, true), Error);
    CHECK_NOTHROW(InterfacePolyline::from_points({{0, 0}, {1, 1}}, false));
}

TEST_CASE("signed distance to a 512-segment circle") {
    TriMesh m = structured_rect(-2, -2, 2, 2, 40, 40);
    auto poly = unit_circle(512);
    LevelSet ls = signed_distance(m, poly, 3.0);
    REQUIRE(ls.alpha.values.size() == static_cast<std::size_t>(m.n_nodes()));

    auto node_at = [&](Vec2 p) {
        for (int n = 0; n < m.n_nodes(); ++n)
            if ((m.coord(n) - p).norm() < 1e-9) return n;
        return -1;
    };
    int right = node_at({2, 0});
    int center = node_at({0, 0});
    REQUIRE(right >= 0);
    REQUIRE(center >= 0);

    // (2,0) lines up with the vertex at angle 0: exact distance 1
    CHECK(std::abs(ls.alpha.values[right] - 1.0) <= 1e-12);
    // the center sees the chord, not the circle: apothem = cos(pi/512)
    double apothem = std::cos(M_PI / 512);
    CHECK(ls.alpha.values[center] == doctest::Approx(-apothem).epsilon(1e-12));
    CHECK(std::abs(ls.alpha.values[center] + 1.0) <= 2e-5);

    // sign convention: negative inside the body, positive outside
    CHECK(ls.alpha.values[node_at({0.5, 0.5})] < 0.0);
    CHECK(ls.alpha.values[node_at({1.5, 1.5})] > 0.0);

    // every off-axis node agrees with the analytic circle to the sagitta
    double sagitta = 1.0 - apothem;
    for (int n = 0; n < m.n_nodes(); ++n) {
        double d = m.coord(n).norm() - 1.0;
        double expect = std::clamp(d, -3.0, 3.0);
        CHECK(std::abs(ls.alpha.values[n] - expect) <= sagitta + 1e-12);
    }
}

TEST_CASE("signed distance obeys truncation and snaps interface nodes to zero") {
    TriMesh m = structured_rect(-2, -2, 2, 2, 16, 16);
    auto poly = unit_circle(256);
    double E = 0.6;
    LevelSet ls = signed_distance(m, poly, E);
    for (double a : ls.alpha.values) CHECK(std::abs(a) <= E);
    // far nodes clamp exactly
    int far = -1;
    for (int n = 0; n < m.n_nodes(); ++n)
        if ((m.coord(n) - Vec2{-2, -2}).norm() < 1e-12) far = n;
    REQUIRE(far >= 0);
    CHECK(ls.alpha.values[far] == E);

    // a mesh node placed exactly on a polyline vertex reports exactly zero
    TriMesh tiny = structured_rect(1, -1, 3, 1, 2, 2);  // node at (1,0) hits angle-0 vertex
    LevelSet lt = signed_distance(tiny, poly, 2.0);
    bool found_zero = false;
    for (int n = 0; n < tiny.n_nodes(); ++n)
        if ((tiny.coord(n) - Vec2{1, 0}).norm() == 0.0) {
            found_zero = true;
            CHECK(lt.alpha.values[n] == 0.0);
        }
    CHECK(found_zero);
}

TEST_CASE("level set gradient has unit magnitude near the interface") {
    TriMesh m = structured_rect(-2, -2, 2, 2, 40, 40);
    auto poly = unit_circle(256);
    double E = 0.6;
    LevelSet ls = signed_distance(m, poly, E);
    int checked = 0;
    for (int t = 0; t < m.n_tris(); ++t) {
        const auto& tr = m.tri(t);
        bool near = true;
        for (int i = 0; i < 3; ++i)
            if (std::abs(ls.alpha.values[tr[i]]) > E / 2) near = false;
        if (!near) continue;
        const auto& G = m.grads(t);
        Vec2 g = G[0] * ls.alpha.values[tr[0]] + G[1] * ls.alpha.values[tr[1]] +
                 G[2] * ls.alpha.values[tr[2]];
        CHECK(g.norm() == doctest::Approx(1.0).epsilon(0.1));
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("binned nearest-segment search matches brute force bit-for-bit") {
    std::vector<TriMesh> meshes;
    meshes.push_back(structured_rect(-1.5, -1.2, 1.7, 1.4, 17, 13));
    {
        TriMesh base = structured_rect(-2.1, -1.9, 2.2, 2.3, 11, 9);
        std::mt19937 rng(42);
        std::uniform_real_distribution<double> d(-0.07, 0.07);
        std::vector<Vec2> c(base.coords().begin(), base.coords().end());
        for (auto& x : c) x += {d(rng), d(rng)};
        meshes.push_back(base.with_coords(c));
    }
    meshes.push_back(structured_rect(-3, -3, 3, 3, 9, 9));

    std::vector<InterfacePolyline> shapes;
    shapes.push_back(unit_circle(64));
    shapes.push_back(InterfacePolyline::from_points(
        {{-0.8, -0.6}, {0.9, -0.7}, {0.8, 0.8}, {-0.7, 0.6}}, true));
    {
        std::vector<Vec2> star;
        for (int k = 0; k < 20; ++k) {
            double r = (k % 2 == 0) ? 1.0 : 0.45;
            double th = 2.0 * M_PI * k / 20;
            star.push_back({r * std::cos(th), r * std::sin(th)});
        }
        shapes.push_back(InterfacePolyline::from_points(std::move(star), true));
    }

    for (std::size_t mi = 0; mi < meshes.size(); ++mi) {
        for (std::size_t si = 0; si < shapes.size(); ++si) {
            for (double E : {0.7, 2.0}) {
                CAPTURE(mi);
                CAPTURE(si);
                CAPTURE(E);
                LevelSet fast = signed_distance(meshes[mi], shapes[si], E);
                LevelSet slow = signed_distance_brute(meshes[mi], shapes[si], E);
                REQUIRE(fast.alpha.values.size() == slow.alpha.values.size());
                int mism = 0;
                for (std::size_t n = 0; n < fast.alpha.values.size(); ++n)
                    if (!same_bits(fast.alpha.values[n], slow.alpha.values[n])) ++mism;
                CHECK(mism == 0);
            }
        }
    }
}

TEST_CASE("extract_polyline: square boundary walks CCW with its tags") {
    SolidState s = square_solid(0.0, 1.0, 2);
    auto poly = extract_polyline(s);
    CHECK(poly.closed);
    CHECK(poly.n_segments() == 8);
    CHECK(poly.length() == doctest::Approx(4.0));

    // shoelace area positive => counter-clockwise
    double area2 = 0.0;
    for (int i = 0; i < poly.n_segments(); ++i) area2 += poly.a(i).cross(poly.b(i));
    CHECK(area2 / 2 == doctest::Approx(1.0));

    std::map<int, double> tag_len;
    for (int i = 0; i < poly.n_segments(); ++i) tag_len[poly.seg_tags[i]] += poly.seg_length(i);
    CHECK(tag_len.size() == 4);
    for (int tag : {btag::kLeft, btag::kRight, btag::kBottom, btag::kTop})
        CHECK(tag_len[tag] == doctest::Approx(1.0));

    // outward normals: bottom segments point down
    for (int i = 0; i < poly.n_segments(); ++i)
        if (poly.seg_tags[i] == btag::kBottom) CHECK(poly.normal(i).y == doctest::Approx(-1.0));

    // node ids recorded so tractions can be scattered back
    for (int i = 0; i < poly.n_segments(); ++i) {
        CHECK(poly.seg_nodes[i][0] >= 0);
        CHECK((s.mesh.coord(poly.seg_nodes[i][0]) - poly.a(i)).norm() <= 1e-15);
    }
}

TEST_CASE("extract_polyline: rigid translation shifts the chain verbatim") {
    SolidState s = square_solid(0.0, 1.0, 2);
    auto before = extract_polyline(s);
    std::vector<Vec2> moved(s.mesh.coords().begin(), s.mesh.coords().end());
    for (auto& x : moved) x += {1.0, 0.0};
    s.mesh = s.mesh.with_coords(moved);
    auto after = extract_polyline(s);
    REQUIRE(after.pts.size() == before.pts.size());
    for (std::size_t i = 0; i < before.pts.size(); ++i) {
        CHECK(after.pts[i].x == before.pts[i].x + 1.0);
        CHECK(after.pts[i].y == before.pts[i].y);
    }
    CHECK(after.seg_tags == before.seg_tags);
}

TEST_CASE("extract_polyline: clamped beam edge keeps a distinct tag") {
    SolidState s = square_solid(0.0, 1.0, 1);
    s.mesh = structured_rect(0, 0, 4, 1, 8, 2);
    auto poly = extract_polyline(s);
    double clamped_len = 0.0;
    int clamped_count = 0;
    for (int i = 0; i < poly.n_segments(); ++i)
        if (poly.seg_tags[i] == btag::kLeft) {
            clamped_len += poly.seg_length(i);
            ++clamped_count;
        }
    CHECK(clamped_count == 2);
    CHECK(clamped_len == doctest::Approx(1.0));
    // so the driver can drop exactly those segments from the traction exchange
    std::set<int> tags(poly.seg_tags.begin(), poly.seg_tags.end());
    CHECK(tags.size() == 4);
}

TEST_CASE("velocity continuity: constants and affine fields transfer exactly") {
    TriMesh fluid = structured_rect(0, 0, 1, 1, 20, 20);
    SolidState solid = square_solid(0.3, 0.7, 4);
    auto poly = extract_polyline(solid);
    LevelSet ls = signed_distance(fluid, poly, default_truncation(fluid, poly));

    SUBCASE("rest") {
        auto cons = velocity_continuity(fluid, ls, solid);
        CHECK(cons.size() == 81);  // 9x9 grid nodes fall in [0.3,0.7]^2
        for (const auto& [n, v] : cons) {
            CHECK(v.x == 0.0);
            CHECK(v.y == 0.0);
        }
    }
    SUBCASE("rigid translation") {
        for (auto& v : solid.v) v = {1.0, 0.0};
        auto cons = velocity_continuity(fluid, ls, solid);
        REQUIRE(!cons.empty());
        for (const auto& [n, v] : cons) {
            CHECK(v.x == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(std::abs(v.y) <= 1e-14);
        }
    }
    SUBCASE("rigid rotation (affine velocity)") {
        const double om = 2.0;
        const Vec2 c{0.5, 0.5};
        for (int i = 0; i < solid.mesh.n_nodes(); ++i) {
            Vec2 r = solid.mesh.coord(i) - c;
            solid.v[i] = {-om * r.y, om * r.x};
        }
        auto cons = velocity_continuity(fluid, ls, solid);
        REQUIRE(!cons.empty());
        for (const auto& [n, v] : cons) {
            Vec2 r = fluid.coord(n) - c;
            CHECK((v - Vec2{-om * r.y, om * r.x}).norm() <= 1e-11);
        }
    }
    SUBCASE("wrapper replaces the immersed list") {
        FluidBCs bcs;
        bcs.immersed.push_back({0, Vec2{9, 9}});
        impose_velocity_continuity(bcs, fluid, ls, solid);
        CHECK(bcs.immersed.size() == 81);
        for (const auto& [n, v] : bcs.immersed) CHECK(v.norm() == 0.0);
    }
    SUBCASE("near-miss uses the nearest solid value, far miss throws") {
        for (auto& v : solid.v) v = {1.0, 0.0};
        int near = -1, far = -1;
        for (int n = 0; n < fluid.n_nodes(); ++n) {
            if ((fluid.coord(n) - Vec2{0.25, 0.5}).norm() < 1e-12) near = n;
            if ((fluid.coord(n) - Vec2{0.05, 0.05}).norm() < 1e-12) far = n;
        }
        REQUIRE(near >= 0);
        REQUIRE(far >= 0);
        LevelSet lied = ls;
        lied.alpha.values[near] = -0.01;
        auto cons = velocity_continuity(fluid, lied, solid);
        bool got = false;
        for (const auto& [n, v] : cons)
            if (n == near) {
                got = true;
                CHECK(v.x == doctest::Approx(1.0).epsilon(1e-14));
            }
        CHECK(got);

        lied.alpha.values[far] = -0.01;
        CHECK_THROWS_AS(velocity_continuity(fluid, lied, solid), TransferMiss);
    }
}

TEST_CASE("traction extraction: hydrostatic and shear oracles") {
    TriMesh m = structured_rect(0, 0, 1, 1, 10, 10);
    FluidMaterial mat;
    mat.mu_f = 0.6;
    FluidState fs;
    fs.mesh = m;
    fs.v = m.make_vector_field();
    fs.p = m.make_scalar_field();

    SUBCASE("quiescent fluid, uniform pressure: t = -p n, zero net force") {
        const double pbar = 2.5;
        for (auto& p : fs.p.values) p = pbar;
        auto loop = InterfacePolyline::from_points(
            {{0.3, 0.3}, {0.7, 0.3}, {0.7, 0.7}, {0.3, 0.7}}, true);
        auto samples = extract_traction(fs, mat, loop);
        CHECK(samples.size() == 8);
        for (const auto& smp : samples) {
            Vec2 n = loop.normal(smp.seg);
            CHECK((smp.t + n * pbar).norm() <= 1e-12);
        }
        Vec2 net = total_sample_force(samples);
        CHECK(net.norm() <= 1e-10);
    }
    SUBCASE("Couette shear: horizontal cut with n = (0,1) sees (mu gdot, -p)") {
        const double gdot = 1.5;
        for (int n = 0; n < m.n_nodes(); ++n) {
            fs.v.values[n] = {gdot * m.coord(n).y, 0.0};
            fs.p.values[n] = 0.8 - 0.1 * m.coord(n).x;
        }
        // travel in -x so the normal (travel rotated -90) points up
        auto cut = InterfacePolyline::from_points({{0.8, 0.4}, {0.2, 0.4}}, false);
        auto samples = extract_traction(fs, mat, cut);
        CHECK(samples.size() == 2);
        for (const auto& smp : samples) {
            CHECK(smp.t.x == doctest::Approx(mat.mu_f * gdot).epsilon(1e-12));
            CHECK(smp.t.y == doctest::Approx(-(0.8 - 0.1 * smp.x.x)).epsilon(1e-12));
        }
    }
    SUBCASE("excluded tags are skipped") {
        auto loop = InterfacePolyline::from_points(
            {{0.3, 0.3}, {0.7, 0.3}, {0.7, 0.7}, {0.3, 0.7}}, true);
        loop.seg_tags[2] = 7;
        auto samples = extract_traction(fs, mat, loop, {7});
        CHECK(samples.size() == 6);
        for (const auto& smp : samples) CHECK(smp.seg != 2);
    }
    SUBCASE("samples outside the mesh are an error") {
        auto bad = InterfacePolyline::from_points({{0.5, 0.5}, {2.5, 0.5}}, false);
        CHECK_THROWS_AS(extract_traction(fs, mat, bad), OutsideDomain);
    }
}

TEST_CASE("action-reaction: nodal loads rebuild the sampled force exactly") {
    TriMesh fluid = structured_rect(0, 0, 1, 1, 16, 16);
    FluidMaterial mat;
    mat.mu_f = 0.35;
    FluidState fs;
    fs.mesh = fluid;
    fs.v = fluid.make_vector_field();
    fs.p = fluid.make_scalar_field();
    for (int n = 0; n < fluid.n_nodes(); ++n) {
        Vec2 x = fluid.coord(n);
        fs.v.values[n] = {0.3 * x.y * x.y - 0.1 * x.x, -0.2 * x.x * x.x + 0.05 * x.y};
        fs.p.values[n] = 0.4 + 0.3 * x.x - 0.2 * x.y * x.x;
    }

    SolidState solid = square_solid(0.3, 0.7, 3);
    auto poly = extract_polyline(solid);
    auto samples = extract_traction(fs, mat, poly);
    REQUIRE(samples.size() == static_cast<std::size_t>(2 * poly.n_segments()));

    auto loads = traction_nodal_loads(solid.mesh.n_nodes(), poly, samples);
    Vec2 total{};
    for (const Vec2& l : loads) total += l;
    Vec2 f = total_sample_force(samples);
    double scale = std::max(1.0, f.norm());
    CHECK((total - f).norm() / scale <= 1e-8);

    // loads live only on boundary nodes
    for (int n = 0; n < solid.mesh.n_nodes(); ++n)
        if (!solid.mesh.node_on_boundary(n)) CHECK(loads[n].norm() == 0.0);

    // polylines without provenance cannot be scattered
    auto synth = InterfacePolyline::from_points({{0.4, 0.4}, {0.6, 0.4}, {0.5, 0.6}}, true);
    auto ssmp = extract_traction(fs, mat, synth);
    CHECK_THROWS_AS(traction_nodal_loads(solid.mesh.n_nodes(), synth, ssmp), Error);
}

TEST_CASE("default truncation is ten mesh sizes") {
    TriMesh m = structured_rect(0, 0, 1, 1, 10, 10);
    auto poly = InterfacePolyline::from_points(
        {{0.3, 0.3}, {0.7, 0.3}, {0.7, 0.7}, {0.3, 0.7}}, true);
    // uniform mesh: every element altitude is 2A/h_max = 0.1/sqrt(2)
    CHECK(default_truncation(m, poly) == doctest::Approx(10 * 0.1 / std::sqrt(2.0)));
    CHECK_THROWS_AS(signed_distance(m, poly, 0.0), Error);
}

TEST_CASE("polyline CSV dump round-trips the segment table") {
    auto poly = InterfacePolyline::from_points({{0, 0}, {2, 0}, {1, 1.5}}, true, 3);
    std::string path = "/tmp/aimm_poly_test.csv";
    write_polyline_csv(path, poly);
    std::FILE* f = std::fopen(path.c_str(), "r");
    REQUIRE(f != nullptr);
    char line[256];
    REQUIRE(std::fgets(line, sizeof line, f) != nullptr);
    CHECK(std::strncmp(line, "x0,y0,x1,y1", 11) == 0);
    int rows = 0;
    double x0, y0, x1, y1, nx, ny;
    int tag;
    while (std::fgets(line, sizeof line, f)) {
        REQUIRE(std::sscanf(line, "%lf,%lf,%lf,%lf,%lf,%lf,%d", &x0, &y0, &x1, &y1, &nx, &ny,
                            &tag) == 7);
        CHECK(tag == 3);
        CHECK(std::hypot(nx, ny) == doctest::Approx(1.0));
        ++rows;
    }
    std::fclose(f);
    CHECK(rows == 3);
}
