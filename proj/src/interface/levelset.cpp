#include "aimm/interface/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "aimm/core/errors.hpp"

namespace aimm {

Vec2 InterfacePolyline::normal(int i) const {
    Vec2 d = b(i) - a(i);
    double len = d.norm();
    return {d.y / len, -d.x / len};
}

double InterfacePolyline::length() const {
    double acc = 0.0;
    for (int i = 0; i < n_segments(); ++i) acc += seg_length(i);
    return acc;
}

InterfacePolyline InterfacePolyline::from_points(std::vector<Vec2> p, bool closed, int tag) {
    InterfacePolyline poly;
    poly.pts = std::move(p);
    poly.closed = closed;
    poly.seg_tags.assign(poly.n_segments(), tag);
    poly.seg_nodes.assign(poly.n_segments(), {-1, -1});
    poly.validate();
    return poly;
}

void InterfacePolyline::validate() const {
    if (closed ? pts.size() < 3 : pts.size() < 2)
        throw Error("interface polyline: too few points for a chain");
    const std::size_t ns = static_cast<std::size_t>(n_segments());
    if (seg_tags.size() != ns || seg_nodes.size() != ns)
        throw Error("interface polyline: per-segment arrays do not match segment count");
    for (int i = 0; i < n_segments(); ++i)
        if (!(seg_length(i) > 0.0)) throw DegeneratePolyline(i);
}

namespace {

struct Nearest {
    double d2 = std::numeric_limits<double>::infinity();
    int seg = -1;
    double t = 0.0;
};

// Tie-aware update: the lowest segment index wins among exact-equal
// distances, independent of visit order, so the binned and brute-force
// searches agree bit-for-bit.
inline void consider(const InterfacePolyline& poly, Vec2 p, int s, Nearest& best) {
    Vec2 a = poly.a(s), b = poly.b(s);
    Vec2 d = b - a;
    double t = (p - a).dot(d) / d.norm2();
    t = std::clamp(t, 0.0, 1.0);
    Vec2 proj = a + d * t;
    double d2 = (p - proj).norm2();
    if (d2 < best.d2 || (d2 == best.d2 && s < best.seg)) best = {d2, s, t};
}

Vec2 vertex_pseudo_normal(const InterfacePolyline& poly, int seg, int end) {
    Vec2 n = poly.normal(seg);
    int other = -1;
    int ns = poly.n_segments();
    if (end == 0)
        other = seg > 0 ? seg - 1 : (poly.closed ? ns - 1 : -1);
    else
        other = seg < ns - 1 ? seg + 1 : (poly.closed ? 0 : -1);
    if (other >= 0) {
        Vec2 sum = n + poly.normal(other);
        double len = sum.norm();
        if (len > 1e-12) return sum / len;
    }
    return n;
}

double signed_alpha(const InterfacePolyline& poly, Vec2 p, const Nearest& best, double E,
                    double snap) {
    Vec2 a = poly.a(best.seg), b = poly.b(best.seg);
    Vec2 proj = a + (b - a) * best.t;
    constexpr double te = 1e-12;
    Vec2 dir;
    if (best.t <= te)
        dir = vertex_pseudo_normal(poly, best.seg, 0);
    else if (best.t >= 1.0 - te)
        dir = vertex_pseudo_normal(poly, best.seg, 1);
    else
        dir = poly.normal(best.seg);
    double d = std::sqrt(best.d2);
    if (d <= snap) return 0.0;
    double sgn = (p - proj).dot(dir) >= 0.0 ? 1.0 : -1.0;
    return std::clamp(sgn * d, -E, E);
}

struct PolyBounds {
    Vec2 lo, hi;
    double diag;
};

PolyBounds poly_bounds(const InterfacePolyline& poly) {
    Vec2 lo = poly.pts[0], hi = poly.pts[0];
    for (const Vec2& p : poly.pts) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    return {lo, hi, (hi - lo).norm()};
}

}  // namespace

LevelSet signed_distance_brute(const TriMesh& mesh, const InterfacePolyline& poly, double E) {
    poly.validate();
    if (!(E > 0.0)) throw Error("signed_distance: truncation E must be positive");
    const double snap = 1e-12 * std::max(poly_bounds(poly).diag, 1e-300);
    LevelSet ls;
    ls.E = E;
    ls.alpha = mesh.make_scalar_field();
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        Vec2 p = mesh.coord(n);
        Nearest best;
        for (int s = 0; s < poly.n_segments(); ++s) consider(poly, p, s, best);
        ls.alpha.values[n] = signed_alpha(poly, p, best, E, snap);
    }
    return ls;
}

namespace {

// Uniform grid over the polyline bounding box; each cell lists the segments
// whose AABB touches it, in ascending index order.
struct SegGrid {
    Vec2 lo;
    double cs = 1.0;
    int nx = 1, ny = 1;
    std::vector<std::vector<int>> cells;

    int cx(double x) const {
        return std::clamp(static_cast<int>(std::floor((x - lo.x) / cs)), 0, nx - 1);
    }
    int cy(double y) const {
        return std::clamp(static_cast<int>(std::floor((y - lo.y) / cs)), 0, ny - 1);
    }
};

SegGrid build_grid(const InterfacePolyline& poly) {
    PolyBounds bb = poly_bounds(poly);
    SegGrid g;
    double mean_len = poly.length() / poly.n_segments();
    g.cs = std::max(mean_len, 1e-6 * std::max(bb.diag, 1e-300));
    g.lo = bb.lo;
    g.nx = std::max(1, static_cast<int>(std::ceil((bb.hi.x - bb.lo.x) / g.cs)) + 1);
    g.ny = std::max(1, static_cast<int>(std::ceil((bb.hi.y - bb.lo.y) / g.cs)) + 1);
    // keep memory sane for long thin chains
    while (static_cast<long long>(g.nx) * g.ny > 1 << 22) {
        g.cs *= 2.0;
        g.nx = std::max(1, static_cast<int>(std::ceil((bb.hi.x - bb.lo.x) / g.cs)) + 1);
        g.ny = std::max(1, static_cast<int>(std::ceil((bb.hi.y - bb.lo.y) / g.cs)) + 1);
    }
    g.cells.resize(static_cast<std::size_t>(g.nx) * g.ny);
    for (int s = 0; s < poly.n_segments(); ++s) {
        Vec2 a = poly.a(s), b = poly.b(s);
        int x0 = g.cx(std::min(a.x, b.x)), x1 = g.cx(std::max(a.x, b.x));
        int y0 = g.cy(std::min(a.y, b.y)), y1 = g.cy(std::max(a.y, b.y));
        for (int j = y0; j <= y1; ++j)
            for (int i = x0; i <= x1; ++i) g.cells[static_cast<std::size_t>(j) * g.nx + i].push_back(s);
    }
    return g;
}

}  // namespace

LevelSet signed_distance(const TriMesh& mesh, const InterfacePolyline& poly, double E) {
    poly.validate();
    if (!(E > 0.0)) throw Error("signed_distance: truncation E must be positive");
    PolyBounds bb = poly_bounds(poly);
    const double snap = 1e-12 * std::max(bb.diag, 1e-300);
    SegGrid grid = build_grid(poly);

    LevelSet ls;
    ls.E = E;
    ls.alpha = mesh.make_scalar_field();
    std::vector<int> cand;
    std::vector<char> seen(poly.n_segments(), 0);
    const int max_ring = grid.nx + grid.ny + 2;
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        Vec2 p = mesh.coord(n);
        double dx = std::max({0.0, bb.lo.x - p.x, p.x - bb.hi.x});
        double dy = std::max({0.0, bb.lo.y - p.y, p.y - bb.hi.y});
        double dist_bb = std::hypot(dx, dy);
        int ci = grid.cx(p.x), cj = grid.cy(p.y);

        cand.clear();
        Nearest best;
        for (int ring = 0; ring <= max_ring; ++ring) {
            // any segment not yet collected is at least this far away
            double lb = std::max(dist_bb, (ring - 1) * grid.cs);
            if (best.seg >= 0 && lb > std::sqrt(best.d2)) break;
            int i0 = ci - ring, i1 = ci + ring, j0 = cj - ring, j1 = cj + ring;
            for (int j = std::max(0, j0); j <= std::min(grid.ny - 1, j1); ++j) {
                bool jedge = (j == j0 || j == j1);
                for (int i = std::max(0, i0); i <= std::min(grid.nx - 1, i1); ++i) {
                    if (!jedge && i != i0 && i != i1) continue;
                    for (int s : grid.cells[static_cast<std::size_t>(j) * grid.nx + i])
                        if (!seen[s]) {
                            seen[s] = 1;
                            cand.push_back(s);
                            consider(poly, p, s, best);
                        }
                }
            }
        }
        for (int s : cand) seen[s] = 0;
        ls.alpha.values[n] = signed_alpha(poly, p, best, E, snap);
    }
    return ls;
}

double default_truncation(const TriMesh& mesh, const InterfacePolyline& poly) {
    double acc = 0.0;
    int cnt = 0;
    int hint = -1;
    for (const Vec2& p : poly.pts) {
        Located loc = mesh.locate(p, hint);
        if (!loc.inside) continue;
        hint = loc.tri;
        acc += mesh.altitude(loc.tri);
        ++cnt;
    }
    if (cnt == 0) {
        for (int t = 0; t < mesh.n_tris(); ++t) acc += mesh.altitude(t);
        cnt = mesh.n_tris();
    }
    return 10.0 * acc / cnt;
}

InterfacePolyline extract_polyline(const SolidState& s) {
    const auto& edges = s.mesh.boundary_edges();
    if (edges.empty()) throw Error("extract_polyline: solid mesh has no boundary");
    std::map<int, int> next;  // source node -> boundary edge index
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
        if (!next.emplace(edges[e].a, e).second)
            throw Error("extract_polyline: boundary node with two outgoing edges");
    }
    InterfacePolyline poly;
    poly.closed = true;
    int start = next.begin()->first;
    int node = start;
    do {
        auto it = next.find(node);
        if (it == next.end()) throw Error("extract_polyline: boundary chain breaks");
        const auto& e = edges[it->second];
        poly.pts.push_back(s.mesh.coord(e.a));
        poly.seg_tags.push_back(e.tag);
        poly.seg_nodes.push_back({e.a, e.b});
        node = e.b;
    } while (node != start && poly.pts.size() <= edges.size());
    if (poly.pts.size() != edges.size())
        throw Error("extract_polyline: solid boundary is not a single closed loop");
    poly.validate();
    return poly;
}

void write_polyline_csv(const std::string& path, const InterfacePolyline& poly) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fprintf(f, "x0,y0,x1,y1,nx,ny,tag\n");
    for (int i = 0; i < poly.n_segments(); ++i) {
        Vec2 a = poly.a(i), b = poly.b(i), n = poly.normal(i);
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", a.x, a.y, b.x, b.y, n.x,
                     n.y, poly.seg_tags[i]);
    }
    std::fclose(f);
}

}  // namespace aimm
