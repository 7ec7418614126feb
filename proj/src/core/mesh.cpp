#include "aimm/core/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace aimm {

namespace {
std::atomic<std::uint64_t> g_mesh_gen{1};

Vec2 closest_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 <= 0.0) return a;
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return a + ab * t;
}
}  // namespace

TriGeom tri_geometry(Vec2 p0, Vec2 p1, Vec2 p2) {
    TriGeom g;
    g.area = 0.5 * (p1 - p0).cross(p2 - p0);
    double inv2a = 1.0 / (2.0 * g.area);
    g.grad[0] = (p2 - p1).perp() * inv2a;
    g.grad[1] = (p0 - p2).perp() * inv2a;
    g.grad[2] = (p1 - p0).perp() * inv2a;
    return g;
}

double tri_altitude(Vec2 p0, Vec2 p1, Vec2 p2) {
    double a2 = (p1 - p0).cross(p2 - p0);
    double lmax = std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
    return std::abs(a2) / lmax;
}

TriMesh TriMesh::build(std::vector<Vec2> coords, std::vector<std::array<int, 3>> tris,
                       BoundaryTags boundary_tags, std::vector<int> tri_tags) {
    TriMesh m;
    m.coords_ = std::move(coords);
    m.tris_ = std::move(tris);
    m.boundary_tags_ = std::move(boundary_tags);
    if (tri_tags.empty()) tri_tags.assign(m.tris_.size(), 0);
    if (tri_tags.size() != m.tris_.size())
        throw Error("tri_tags size does not match triangle count");
    m.tri_tags_ = std::move(tri_tags);
    m.finalize();
    return m;
}

TriMesh TriMesh::with_coords(std::vector<Vec2> coords) const {
    if (coords.size() != coords_.size())
        throw Error("with_coords: coordinate count changed");
    TriMesh m;
    m.coords_ = std::move(coords);
    m.tris_ = tris_;
    m.boundary_tags_ = boundary_tags_;
    m.tri_tags_ = tri_tags_;
    m.finalize();
    return m;
}

void TriMesh::finalize() {
    const int nn = n_nodes();
    const int nt = n_tris();
    if (nn < 3 || nt < 1) throw Error("mesh needs at least one triangle");

    geom_.resize(nt);
    altitude_.resize(nt);
    total_area_ = 0.0;
    std::vector<char> used(nn, 0);
    for (int t = 0; t < nt; ++t) {
        const auto& tr = tris_[t];
        for (int k = 0; k < 3; ++k) {
            if (tr[k] < 0 || tr[k] >= nn) throw Error("triangle references missing node");
            used[tr[k]] = 1;
        }
        geom_[t] = tri_geometry(coords_[tr[0]], coords_[tr[1]], coords_[tr[2]]);
        if (!(geom_[t].area > 0.0)) throw NonPositiveArea(t);
        altitude_[t] = tri_altitude(coords_[tr[0]], coords_[tr[1]], coords_[tr[2]]);
        total_area_ += geom_[t].area;
    }
    for (int n = 0; n < nn; ++n)
        if (!used[n]) throw DanglingNode(n);

    // unique edges; an edge in more than two triangles is non-manifold
    std::map<std::pair<int, int>, int> edge_id;
    edges_.clear();
    neighbor_.assign(nt, {-1, -1, -1});
    // local edge opposite vertex k joins vertices (k+1)%3, (k+2)%3
    std::vector<std::array<int, 3>> tri_edge(nt);
    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
            int a = tris_[t][(k + 1) % 3], b = tris_[t][(k + 2) % 3];
            auto key = std::minmax(a, b);
            auto it = edge_id.find(key);
            if (it == edge_id.end()) {
                edge_id.emplace(key, static_cast<int>(edges_.size()));
                tri_edge[t][k] = static_cast<int>(edges_.size());
                edges_.push_back({key.first, key.second, t, -1});
            } else {
                MeshEdge& e = edges_[it->second];
                if (e.t1 != -1) throw NonManifoldEdge(key.first, key.second);
                e.t1 = t;
                tri_edge[t][k] = it->second;
            }
        }
    }
    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
            const MeshEdge& e = edges_[tri_edge[t][k]];
            neighbor_[t][k] = (e.t0 == t) ? e.t1 : e.t0;
        }
    }

    // patches
    patches_.assign(nn, {});
    for (int t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k) patches_[tris_[t][k]].tris.push_back(t);
    for (const MeshEdge& e : edges_) {
        patches_[e.a].nodes.push_back(e.b);
        patches_[e.b].nodes.push_back(e.a);
        if (e.t1 == -1) {
            patches_[e.a].on_boundary = true;
            patches_[e.b].on_boundary = true;
        }
    }
    for (int n = 0; n < nn; ++n) {
        auto& p = patches_[n];
        std::sort(p.tris.begin(), p.tris.end());
        std::sort(p.nodes.begin(), p.nodes.end());
        if (p.tris.empty()) throw DegeneratePatch(n);
    }

    // oriented boundary edges: for boundary edge of triangle t opposite local
    // vertex k, the order (tris[t][(k+1)%3], tris[t][(k+2)%3]) keeps the
    // domain on the left.
    boundary_edges_.clear();
    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
            if (neighbor_[t][k] != -1) continue;
            int a = tris_[t][(k + 1) % 3], b = tris_[t][(k + 2) % 3];
            auto key = std::minmax(a, b);
            int tag = 0;
            if (auto it = boundary_tags_.find(key); it != boundary_tags_.end()) tag = it->second;
            boundary_edges_.push_back({a, b, tag, t});
        }
    }
    std::sort(boundary_edges_.begin(), boundary_edges_.end(),
              [](const BEdge& l, const BEdge& r) { return std::tie(l.a, l.b) < std::tie(r.a, r.b); });
    for (const auto& [key, tag] : boundary_tags_) {
        auto it = edge_id.find(key);
        if (it == edge_id.end() || edges_[it->second].t1 != -1)
            throw Error("boundary tag on edge (" + std::to_string(key.first) + "," +
                        std::to_string(key.second) + ") that is not a boundary edge");
    }

    // bbox + snap tolerance
    bbox_min_ = bbox_max_ = coords_[0];
    for (Vec2 c : coords_) {
        bbox_min_.x = std::min(bbox_min_.x, c.x);
        bbox_min_.y = std::min(bbox_min_.y, c.y);
        bbox_max_.x = std::max(bbox_max_.x, c.x);
        bbox_max_.y = std::max(bbox_max_.y, c.y);
    }
    snap_tol_ = 1e-10 * (bbox_max_ - bbox_min_).norm();

    // seed grid for locate(): one representative triangle per cell
    grid_n_ = std::clamp(static_cast<int>(std::ceil(std::sqrt(static_cast<double>(nt)))), 1, 512);
    double wx = std::max(bbox_max_.x - bbox_min_.x, 1e-300);
    double wy = std::max(bbox_max_.y - bbox_min_.y, 1e-300);
    grid_hx_ = wx / grid_n_;
    grid_hy_ = wy / grid_n_;
    grid_seed_tri_.assign(static_cast<std::size_t>(grid_n_) * grid_n_, -1);
    for (int t = 0; t < nt; ++t) {
        Vec2 c = (coords_[tris_[t][0]] + coords_[tris_[t][1]] + coords_[tris_[t][2]]) / 3.0;
        int ix = std::clamp(static_cast<int>((c.x - bbox_min_.x) / grid_hx_), 0, grid_n_ - 1);
        int iy = std::clamp(static_cast<int>((c.y - bbox_min_.y) / grid_hy_), 0, grid_n_ - 1);
        grid_seed_tri_[static_cast<std::size_t>(iy) * grid_n_ + ix] = t;
    }

    gen_ = g_mesh_gen.fetch_add(1);
}

const Patch& TriMesh::patch_of(int n) const {
    if (n < 0 || n >= n_nodes()) throw Error("patch_of: node index out of range");
    return patches_[n];
}

std::array<double, 3> TriMesh::barycentric(int t, Vec2 p) const {
    const auto& tr = tris_[t];
    Vec2 p0 = coords_[tr[0]], p1 = coords_[tr[1]], p2 = coords_[tr[2]];
    double inv2a = 1.0 / (2.0 * geom_[t].area);
    return {(p1 - p).cross(p2 - p) * inv2a, (p2 - p).cross(p0 - p) * inv2a,
            (p0 - p).cross(p1 - p) * inv2a};
}

Vec2 TriMesh::nearest_boundary_point(Vec2 p) const {
    double best = std::numeric_limits<double>::infinity();
    Vec2 bp = coords_[boundary_edges_[0].a];
    for (const BEdge& e : boundary_edges_) {
        Vec2 q = closest_on_segment(p, coords_[e.a], coords_[e.b]);
        double d = (q - p).norm2();
        if (d < best) {
            best = d;
            bp = q;
        }
    }
    return bp;
}

int TriMesh::grid_seed(Vec2 p) const {
    int ix = std::clamp(static_cast<int>((p.x - bbox_min_.x) / grid_hx_), 0, grid_n_ - 1);
    int iy = std::clamp(static_cast<int>((p.y - bbox_min_.y) / grid_hy_), 0, grid_n_ - 1);
    // expanding ring search for a non-empty cell
    for (int r = 0; r < grid_n_; ++r) {
        for (int dy = -r; dy <= r; ++dy) {
            int jy = iy + dy;
            if (jy < 0 || jy >= grid_n_) continue;
            for (int dx = -r; dx <= r; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                int jx = ix + dx;
                if (jx < 0 || jx >= grid_n_) continue;
                int t = grid_seed_tri_[static_cast<std::size_t>(jy) * grid_n_ + jx];
                if (t != -1) return t;
            }
        }
    }
    return 0;
}

int TriMesh::brute_force(Vec2 p, std::array<double, 3>& bary) const {
    int best = -1;
    double best_min = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < n_tris(); ++t) {
        auto b = barycentric(t, p);
        double mn = std::min({b[0], b[1], b[2]});
        if (mn > best_min) {
            best_min = mn;
            best = t;
            bary = b;
        }
    }
    return best;
}

Located TriMesh::locate(Vec2 p, int seed_hint) const {
    int t = (seed_hint >= 0 && seed_hint < n_tris()) ? seed_hint : grid_seed(p);
    const int max_steps = 2 * n_tris() + 16;
    std::array<double, 3> bary{};
    bool resolved = false;
    int prev = -1;
    for (int step = 0; step < max_steps; ++step) {
        bary = barycentric(t, p);
        int k = 0;
        if (bary[1] < bary[k]) k = 1;
        if (bary[2] < bary[k]) k = 2;
        if (bary[k] >= -1e-13) {
            resolved = true;
            break;
        }
        int nb = neighbor_[t][k];
        if (nb == -1 || nb == prev) break;  // hit boundary or ping-pong
        prev = t;
        t = nb;
    }
    if (!resolved) {
        // walk failed (left the domain or cycled): exhaustive scan
        t = brute_force(p, bary);
    }
    double mn = std::min({bary[0], bary[1], bary[2]});
    // snap tolerance measured in physical length: barycentric deficit times
    // the local size gives the distance outside the element
    double phys = -mn * 2.0 * geom_[t].area / std::max(altitude_[t], 1e-300);
    Located loc;
    if (mn < 0.0 && phys > snap_tol_) {
        loc.inside = false;
        loc.nearest = nearest_boundary_point(p);
        return loc;
    }
    if (mn < 0.0) {
        for (double& b : bary) b = std::max(b, 0.0);
        double s = bary[0] + bary[1] + bary[2];
        for (double& b : bary) b /= s;
    }
    loc.inside = true;
    loc.tri = t;
    loc.bary = bary;
    return loc;
}

void TriMesh::check_field(std::uint64_t field_gen, std::size_t n) const {
    if (field_gen != gen_) throw StaleField(field_gen, gen_);
    if (n != coords_.size()) throw Error("field size does not match mesh");
}

namespace {
[[noreturn]] void outside(const Located& loc) {
    throw OutsideDomain("point lies outside the mesh; nearest boundary point (" +
                        std::to_string(loc.nearest.x) + ", " + std::to_string(loc.nearest.y) +
                        ")");
}
}  // namespace

double TriMesh::value_at(const ScalarField& f, const Located& loc) const {
    check_field(f.gen, f.values.size());
    if (!loc.inside) outside(loc);
    const auto& tr = tris_[loc.tri];
    return loc.bary[0] * f.values[tr[0]] + loc.bary[1] * f.values[tr[1]] +
           loc.bary[2] * f.values[tr[2]];
}

Vec2 TriMesh::value_at(const VectorField& f, const Located& loc) const {
    check_field(f.gen, f.values.size());
    if (!loc.inside) outside(loc);
    const auto& tr = tris_[loc.tri];
    return f.values[tr[0]] * loc.bary[0] + f.values[tr[1]] * loc.bary[1] +
           f.values[tr[2]] * loc.bary[2];
}

Sym2 TriMesh::value_at(const TensorField& f, const Located& loc) const {
    check_field(f.gen, f.values.size());
    if (!loc.inside) outside(loc);
    const auto& tr = tris_[loc.tri];
    return f.values[tr[0]] * loc.bary[0] + f.values[tr[1]] * loc.bary[1] +
           f.values[tr[2]] * loc.bary[2];
}

double TriMesh::interpolate(const ScalarField& f, Vec2 p, int seed_hint) const {
    check_field(f.gen, f.values.size());
    return value_at(f, locate(p, seed_hint));
}

Vec2 TriMesh::interpolate(const VectorField& f, Vec2 p, int seed_hint) const {
    check_field(f.gen, f.values.size());
    return value_at(f, locate(p, seed_hint));
}

Sym2 TriMesh::interpolate(const TensorField& f, Vec2 p, int seed_hint) const {
    check_field(f.gen, f.values.size());
    return value_at(f, locate(p, seed_hint));
}

ScalarField TriMesh::make_scalar_field(double init) const {
    ScalarField f;
    f.values.assign(coords_.size(), init);
    f.gen = gen_;
    return f;
}

VectorField TriMesh::make_vector_field(Vec2 init) const {
    VectorField f;
    f.values.assign(coords_.size(), init);
    f.gen = gen_;
    return f;
}

TensorField TriMesh::make_tensor_field(Sym2 init) const {
    TensorField f;
    f.values.assign(coords_.size(), init);
    f.gen = gen_;
    return f;
}

TriMesh structured_rect(double x0, double y0, double x1, double y1, int nx, int ny) {
    if (nx < 1 || ny < 1) throw Error("structured_rect needs nx, ny >= 1");
    std::vector<Vec2> coords;
    coords.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            coords.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny});
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<std::size_t>(nx) * ny * 2);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int n00 = id(i, j), n10 = id(i + 1, j), n01 = id(i, j + 1), n11 = id(i + 1, j + 1);
            // alternate the diagonal to avoid a mesh-wide bias
            if ((i + j) % 2 == 0) {
                tris.push_back({n00, n10, n11});
                tris.push_back({n00, n11, n01});
            } else {
                tris.push_back({n00, n10, n01});
                tris.push_back({n10, n11, n01});
            }
        }
    }
    TriMesh::BoundaryTags tags;
    for (int j = 0; j < ny; ++j) {
        tags[std::minmax(id(0, j), id(0, j + 1))] = btag::kLeft;
        tags[std::minmax(id(nx, j), id(nx, j + 1))] = btag::kRight;
    }
    for (int i = 0; i < nx; ++i) {
        tags[std::minmax(id(i, 0), id(i + 1, 0))] = btag::kBottom;
        tags[std::minmax(id(i, ny), id(i + 1, ny))] = btag::kTop;
    }
    return TriMesh::build(std::move(coords), std::move(tris), std::move(tags));
}

}  // namespace aimm
