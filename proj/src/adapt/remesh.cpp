#include "aimm/adapt/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "aimm/core/errors.hpp"

namespace aimm {

namespace {

// Evaluates the metric anywhere by interpolation on the input mesh; points
// nudged outside by roundoff fall back to the nearest boundary point.
struct MetricSampler {
    const TriMesh& donor;
    TensorField field;
    mutable int hint = 0;

    Sym2 at(Vec2 p) const {
        Located loc = donor.locate(p, hint);
        if (!loc.inside) loc = donor.locate(loc.nearest, hint);
        if (!loc.inside)
            throw OutsideDomain("remesh metric lookup left the input mesh");
        hint = loc.tri;
        return donor.value_at(field, loc);
    }
};

// Editable copy of the mesh. Triangles are tombstoned in place
// (tri[t][0] == -1) and nodes only ever appended, so ids stay stable within
// a sweep; compaction happens at the sweep boundary when the mesh is rebuilt
// and re-validated.
struct Work {
    std::vector<Vec2> xy;
    std::vector<Sym2> M;
    std::vector<char> node_alive;
    std::vector<std::array<int, 3>> tri;
    std::vector<int> ttag;
    TriMesh::BoundaryTags btag;

    bool tri_alive(int t) const { return tri[t][0] >= 0; }
};

Work make_work(const TriMesh& m, const std::vector<Sym2>& metric) {
    Work w;
    w.xy = m.coords();
    w.M = metric;
    w.node_alive.assign(w.xy.size(), 1);
    w.tri = m.tris();
    w.ttag = m.tri_tags();
    w.btag = m.boundary_tags();
    return w;
}

using EdgeKey = std::pair<int, int>;
using EdgeMap = std::map<EdgeKey, std::array<int, 2>>;

EdgeKey key_of(int a, int b) { return std::minmax(a, b); }

EdgeMap collect_edges(const Work& w) {
    EdgeMap edges;
    for (int t = 0; t < static_cast<int>(w.tri.size()); ++t) {
        if (!w.tri_alive(t)) continue;
        for (int k = 0; k < 3; ++k) {
            auto [it, fresh] =
                edges.try_emplace(key_of(w.tri[t][k], w.tri[t][(k + 1) % 3]),
                                  std::array<int, 2>{t, -1});
            if (!fresh) it->second[1] = t;
        }
    }
    return edges;
}

void replace_adj(EdgeMap& edges, EdgeKey key, int told, int tnew) {
    auto it = edges.find(key);
    if (it == edges.end()) return;
    if (it->second[0] == told)
        it->second[0] = tnew;
    else if (it->second[1] == told)
        it->second[1] = tnew;
}

void add_adj(EdgeMap& edges, EdgeKey key, int t) {
    auto [it, fresh] = edges.try_emplace(key, std::array<int, 2>{t, -1});
    if (!fresh) it->second[1] = t;
}

double edge_len_m(const Work& w, int a, int b) {
    return metric_edge_length(w.xy[a], w.xy[b], w.M[a], w.M[b]);
}

double quality_of(const Work& w, int a, int b, int c) {
    return metric_quality(w.xy[a], w.xy[b], w.xy[c], w.M[a], w.M[b], w.M[c]);
}

struct Cand {
    double len;
    int a, b;
};

// Longest-edge-first midpoint splits. Only edges present at the start of the
// pass are candidates, so a single pass cannot split its own children.
long split_pass(Work& w, const MetricSampler& ms, double thresh) {
    EdgeMap edges = collect_edges(w);
    std::vector<Cand> cands;
    for (const auto& [key, adj] : edges) {
        double len = edge_len_m(w, key.first, key.second);
        if (len > thresh) cands.push_back({len, key.first, key.second});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& l, const Cand& r) {
        return std::tie(r.len, l.a, l.b) < std::tie(l.len, r.a, r.b);
    });

    long ops = 0;
    for (const Cand& c : cands) {
        auto it = edges.find(key_of(c.a, c.b));
        if (it == edges.end()) continue;
        std::array<int, 2> adj = it->second;
        int mid = static_cast<int>(w.xy.size());
        Vec2 xm = (w.xy[c.a] + w.xy[c.b]) * 0.5;
        w.xy.push_back(xm);
        w.M.push_back(ms.at(xm));
        w.node_alive.push_back(1);

        if (auto bit = w.btag.find(key_of(c.a, c.b)); bit != w.btag.end()) {
            int tag = bit->second;
            w.btag.erase(bit);
            w.btag[key_of(c.a, mid)] = tag;
            w.btag[key_of(mid, c.b)] = tag;
        }
        edges.erase(it);

        for (int t : adj) {
            if (t < 0) continue;
            int p = -1, q = -1, o = -1;
            for (int k = 0; k < 3; ++k) {
                int u = w.tri[t][k], v = w.tri[t][(k + 1) % 3];
                if ((u == c.a && v == c.b) || (u == c.b && v == c.a)) {
                    p = u;
                    q = v;
                    o = w.tri[t][(k + 2) % 3];
                    break;
                }
            }
            int tp = static_cast<int>(w.tri.size());
            int tq = tp + 1;
            w.tri.push_back({p, mid, o});
            w.ttag.push_back(w.ttag[t]);
            w.tri.push_back({mid, q, o});
            w.ttag.push_back(w.ttag[t]);
            w.tri[t][0] = -1;

            replace_adj(edges, key_of(p, o), t, tp);
            replace_adj(edges, key_of(q, o), t, tq);
            add_adj(edges, key_of(mid, o), tp);
            add_adj(edges, key_of(mid, o), tq);
            add_adj(edges, key_of(p, mid), tp);
            add_adj(edges, key_of(mid, q), tq);
        }
        ++ops;
    }
    return ops;
}

// Node -> incident triangle ids. Entries may go stale as triangles die;
// every consumer filters on tri_alive.
std::vector<std::vector<int>> node_tris_of(const Work& w) {
    std::vector<std::vector<int>> nt(w.xy.size());
    for (int t = 0; t < static_cast<int>(w.tri.size()); ++t) {
        if (!w.tri_alive(t)) continue;
        for (int k = 0; k < 3; ++k) nt[w.tri[t][k]].push_back(t);
    }
    return nt;
}

std::vector<int> ring_of(const Work& w, const std::vector<std::vector<int>>& nt,
                         int n) {
    std::vector<int> ring;
    for (int t : nt[n]) {
        if (!w.tri_alive(t)) continue;
        for (int k = 0; k < 3; ++k)
            if (w.tri[t][k] != n) ring.push_back(w.tri[t][k]);
    }
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    return ring;
}

// Boundary neighbours of every node, straight from the maintained tag map.
std::vector<std::vector<std::pair<int, int>>> boundary_links(const Work& w) {
    std::vector<std::vector<std::pair<int, int>>> bl(w.xy.size());
    for (const auto& [key, tag] : w.btag) {
        bl[key.first].push_back({key.second, tag});
        bl[key.second].push_back({key.first, tag});
    }
    return bl;
}

// A boundary node may be removed only when its two boundary edges carry the
// same tag and are colinear, so corners and tag breaks stay put.
bool boundary_removable(const Work& w,
                        const std::vector<std::vector<std::pair<int, int>>>& bl,
                        int v) {
    const auto& links = bl[v];
    if (links.size() != 2) return false;
    if (links[0].second != links[1].second) return false;
    Vec2 d0 = w.xy[links[0].first] - w.xy[v];
    Vec2 d1 = w.xy[links[1].first] - w.xy[v];
    double n0 = std::hypot(d0.x, d0.y), n1 = std::hypot(d1.x, d1.y);
    return std::abs(d0.cross(d1)) <= 1e-9 * n0 * n1;
}

bool positive_area(Vec2 a, Vec2 b, Vec2 c) {
    Vec2 u = b - a, v = c - a;
    double floor = 1e-12 * std::hypot(u.x, u.y) * std::hypot(v.x, v.y);
    return u.cross(v) > floor;
}

// Attempt to collapse `victim` onto `survivor`. Returns false (leaving the
// mesh untouched) when the link condition fails, any rewritten triangle
// would invert, or a surviving edge would leave the band at the top (which
// the split pass would immediately undo).
bool try_collapse(Work& w, std::vector<std::vector<int>>& nt,
                  std::vector<std::vector<std::pair<int, int>>>& bl,
                  int survivor, int victim, double max_len) {
    std::vector<int> shared;
    for (int t : nt[victim]) {
        if (!w.tri_alive(t)) continue;
        const auto& tr = w.tri[t];
        if (tr[0] == survivor || tr[1] == survivor || tr[2] == survivor)
            shared.push_back(t);
    }
    if (shared.empty()) return false;

    // link condition: the rings of the endpoints may meet only at the
    // opposite vertices of the shared triangles
    std::vector<int> opp;
    for (int t : shared)
        for (int k = 0; k < 3; ++k)
            if (w.tri[t][k] != survivor && w.tri[t][k] != victim)
                opp.push_back(w.tri[t][k]);
    std::sort(opp.begin(), opp.end());
    opp.erase(std::unique(opp.begin(), opp.end()), opp.end());

    std::vector<int> ra = ring_of(w, nt, survivor);
    std::vector<int> rb = ring_of(w, nt, victim);
    std::vector<int> inter;
    std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(),
                          std::back_inserter(inter));
    if (inter != opp) return false;

    // band guard: refuse when a created edge would immediately re-split
    for (int n : rb) {
        if (n == survivor) continue;
        if (std::binary_search(ra.begin(), ra.end(), n)) continue;
        if (edge_len_m(w, survivor, n) > max_len) return false;
    }

    // simulate the rewrites
    std::vector<int> rewrite;
    for (int t : nt[victim]) {
        if (!w.tri_alive(t)) continue;
        if (std::find(shared.begin(), shared.end(), t) != shared.end()) continue;
        std::array<int, 3> tr = w.tri[t];
        for (int k = 0; k < 3; ++k)
            if (tr[k] == victim) tr[k] = survivor;
        if (!positive_area(w.xy[tr[0]], w.xy[tr[1]], w.xy[tr[2]])) return false;
        rewrite.push_back(t);
    }

    for (int t : shared) w.tri[t][0] = -1;
    for (int t : rewrite) {
        for (int k = 0; k < 3; ++k)
            if (w.tri[t][k] == victim) w.tri[t][k] = survivor;
        nt[survivor].push_back(t);
    }
    nt[victim].clear();
    w.node_alive[victim] = 0;

    if (!bl[victim].empty()) {
        // victim sits on the boundary: splice its two boundary edges (one of
        // which is victim-survivor) into survivor-other
        int other = -1, tag = 0;
        for (auto [n, tg] : bl[victim]) {
            w.btag.erase(key_of(victim, n));
            if (n != survivor) {
                other = n;
                tag = tg;
            }
        }
        auto drop = [&](std::vector<std::pair<int, int>>& v, int n) {
            v.erase(std::remove_if(v.begin(), v.end(),
                                   [n](auto& pr) { return pr.first == n; }),
                    v.end());
        };
        drop(bl[survivor], victim);
        drop(bl[other], victim);
        bl[victim].clear();
        w.btag[key_of(survivor, other)] = tag;
        bl[survivor].push_back({other, tag});
        bl[other].push_back({survivor, tag});
    }
    return true;
}

// Shortest-edge-first collapses. Legality is re-evaluated against the
// current mesh when each candidate is processed, so earlier collapses simply
// invalidate later overlapping ones. `budget` caps the number of successful
// collapses (used by the node-budget trim).
long collapse_pass(Work& w, double thresh, double max_len,
                   long budget = std::numeric_limits<long>::max()) {
    EdgeMap edges = collect_edges(w);
    std::vector<Cand> cands;
    for (const auto& [key, adj] : edges) {
        double len = edge_len_m(w, key.first, key.second);
        if (len < thresh) cands.push_back({len, key.first, key.second});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& l, const Cand& r) {
        return std::tie(l.len, l.a, l.b) < std::tie(r.len, r.a, r.b);
    });

    auto nt = node_tris_of(w);
    auto bl = boundary_links(w);
    long ops = 0;
    for (const Cand& c : cands) {
        if (ops >= budget) break;
        if (!w.node_alive[c.a] || !w.node_alive[c.b]) continue;
        bool ba = !bl[c.a].empty(), bb = !bl[c.b].empty();
        if (ba && bb) {
            // both ends on the boundary: only a genuine boundary edge may
            // collapse, and only by removing a straight-run node
            if (!w.btag.count(key_of(c.a, c.b))) continue;
            if (boundary_removable(w, bl, c.b) && try_collapse(w, nt, bl, c.a, c.b, max_len))
                ++ops;
            else if (boundary_removable(w, bl, c.a) &&
                     try_collapse(w, nt, bl, c.b, c.a, max_len))
                ++ops;
        } else if (ba) {
            ops += try_collapse(w, nt, bl, c.a, c.b, max_len) ? 1 : 0;
        } else if (bb) {
            ops += try_collapse(w, nt, bl, c.b, c.a, max_len) ? 1 : 0;
        } else {
            if (try_collapse(w, nt, bl, c.a, c.b, max_len) ||
                try_collapse(w, nt, bl, c.b, c.a, max_len))
                ++ops;
        }
    }
    return ops;
}

// Lawson-style flips keyed on the worse shape quality of the adjacent pair.
// Strict improvement makes the sorted global quality vector increase, so the
// pass cannot cycle.
long flip_pass(Work& w) {
    EdgeMap edges = collect_edges(w);
    std::vector<EdgeKey> keys;
    for (const auto& [key, adj] : edges)
        if (adj[1] >= 0) keys.push_back(key);

    long ops = 0;
    for (EdgeKey key : keys) {
        auto it = edges.find(key);
        if (it == edges.end() || it->second[1] < 0) continue;
        auto [t0, t1] = it->second;
        if (!w.tri_alive(t0) || !w.tri_alive(t1)) continue;
        if (w.ttag[t0] != w.ttag[t1]) continue;

        // orient the shared edge as (p,q) counterclockwise in t0
        int p = -1, q = -1, o0 = -1;
        for (int k = 0; k < 3; ++k) {
            int u = w.tri[t0][k], v = w.tri[t0][(k + 1) % 3];
            if (key_of(u, v) == key) {
                p = u;
                q = v;
                o0 = w.tri[t0][(k + 2) % 3];
                break;
            }
        }
        int o1 = -1;
        for (int k = 0; k < 3; ++k)
            if (w.tri[t1][k] != p && w.tri[t1][k] != q) o1 = w.tri[t1][k];
        if (edges.count(key_of(o0, o1))) continue;

        if (!positive_area(w.xy[p], w.xy[o1], w.xy[o0])) continue;
        if (!positive_area(w.xy[q], w.xy[o0], w.xy[o1])) continue;

        double q_old = std::min(quality_of(w, p, q, o0), quality_of(w, q, p, o1));
        double q_new =
            std::min(quality_of(w, p, o1, o0), quality_of(w, q, o0, o1));
        if (!(q_new > q_old + 1e-12)) continue;

        w.tri[t0] = {p, o1, o0};
        w.tri[t1] = {q, o0, o1};
        edges.erase(it);
        edges[key_of(o0, o1)] = {t0, t1};
        replace_adj(edges, key_of(q, o0), t0, t1);
        replace_adj(edges, key_of(p, o1), t1, t0);
        ++ops;
    }
    return ops;
}

// Metric-weighted Laplacian smoothing of interior nodes, with step halving
// until no incident triangle inverts. Moved nodes re-sample the metric.
void smooth_pass(Work& w, const MetricSampler& ms) {
    auto nt = node_tris_of(w);
    auto bl = boundary_links(w);
    for (int n = 0; n < static_cast<int>(w.xy.size()); ++n) {
        if (!w.node_alive[n] || !bl[n].empty()) continue;
        Vec2 num{};
        double den = 0.0;
        for (int j : ring_of(w, nt, n)) {
            double wj = edge_len_m(w, n, j);
            num = num + w.xy[j] * wj;
            den += wj;
        }
        if (den <= 0.0) continue;
        Vec2 d = num * (1.0 / den) - w.xy[n];
        for (double lam : {0.7, 0.35, 0.175}) {
            Vec2 xn = w.xy[n] + d * lam;
            bool ok = true;
            for (int t : nt[n]) {
                if (!w.tri_alive(t)) continue;
                Vec2 c[3];
                for (int k = 0; k < 3; ++k)
                    c[k] = w.tri[t][k] == n ? xn : w.xy[w.tri[t][k]];
                if (!positive_area(c[0], c[1], c[2])) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                w.xy[n] = xn;
                w.M[n] = ms.at(xn);
                break;
            }
        }
    }
}

// Drop tombstones, renumber nodes ascending, and run the mesh through full
// construction-time validation.
TriMesh compact_and_build(Work& w) {
    int nn = static_cast<int>(w.xy.size());
    std::vector<int> remap(nn, -1);
    std::vector<char> used(nn, 0);
    for (int t = 0; t < static_cast<int>(w.tri.size()); ++t)
        if (w.tri_alive(t))
            for (int k = 0; k < 3; ++k) used[w.tri[t][k]] = 1;

    std::vector<Vec2> coords;
    std::vector<Sym2> M;
    for (int n = 0; n < nn; ++n) {
        if (!used[n]) continue;
        remap[n] = static_cast<int>(coords.size());
        coords.push_back(w.xy[n]);
        M.push_back(w.M[n]);
    }
    std::vector<std::array<int, 3>> tris;
    std::vector<int> ttag;
    for (int t = 0; t < static_cast<int>(w.tri.size()); ++t) {
        if (!w.tri_alive(t)) continue;
        tris.push_back({remap[w.tri[t][0]], remap[w.tri[t][1]], remap[w.tri[t][2]]});
        ttag.push_back(w.ttag[t]);
    }
    TriMesh::BoundaryTags btag;
    for (const auto& [key, tag] : w.btag)
        btag[key_of(remap[key.first], remap[key.second])] = tag;

    TriMesh mesh = TriMesh::build(std::move(coords), std::move(tris),
                                  std::move(btag), std::move(ttag));
    w = make_work(mesh, M);
    return mesh;
}

}  // namespace

double metric_quality(Vec2 a, Vec2 b, Vec2 c, const Sym2& Ma, const Sym2& Mb,
                      const Sym2& Mc) {
    Sym2 mbar = (Ma + Mb + Mc) * (1.0 / 3.0);
    double area_m = 0.5 * (b - a).cross(c - a) * std::sqrt(std::max(mbar.det(), 0.0));
    double l2 = 0.0;
    double lab = metric_edge_length(a, b, Ma, Mb);
    double lbc = metric_edge_length(b, c, Mb, Mc);
    double lca = metric_edge_length(c, a, Mc, Ma);
    l2 = lab * lab + lbc * lbc + lca * lca;
    if (l2 <= 0.0) return 0.0;
    return 4.0 * std::sqrt(3.0) * area_m / l2;
}

RemeshResult remesh_to_metric(const TriMesh& m, const MetricField& metric,
                              const RemeshOpts& opts) {
    if (metric.gen != m.generation() ||
        metric.m.size() != static_cast<std::size_t>(m.n_nodes()))
        throw StaleField(metric.gen, m.generation());
    if (opts.max_sweeps < 1) throw Error("remesh: max_sweeps must be >= 1");
    if (!(opts.split_above > 1.0 && opts.collapse_below < 1.0 &&
          opts.collapse_below > 0.0))
        throw Error("remesh: thresholds must bracket the unit metric length");

    MetricSampler ms{m, TensorField{metric.m, m.generation()}, 0};
    Work w = make_work(m, metric.m);

    RemeshResult r;
    r.mesh = m;
    bool settled = false;
    int prev_nodes = m.n_nodes(), prev_delta = 1 << 30;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        // Smoothing leads each sweep after the first, so the returned mesh is
        // always in the post-split/collapse/flip state with edges in band.
        if (sweep > 0 && opts.smooth) smooth_pass(w, ms);

        // alternate splits and collapses to a joint fixed point: collapses
        // can create long edges and splits short ones
        long ns = 0, nc = 0;
        for (int inner = 0; inner < 10; ++inner) {
            long s1 = split_pass(w, ms, opts.split_above);
            long c1 = collapse_pass(w, opts.collapse_below, opts.split_above);
            ns += s1;
            nc += c1;
            if (s1 + c1 == 0) break;
        }
        long nf = flip_pass(w);

        r.mesh = compact_and_build(w);
        r.sweeps = sweep + 1;
        r.splits += ns;
        r.collapses += nc;
        r.flips += nf;

        if (ns + nc + nf == 0) {
            settled = true;
            break;
        }
        // smoothing-induced churn: treat two consecutive sweeps with a
        // near-constant node count as converged
        int delta = std::abs(r.mesh.n_nodes() - prev_nodes);
        int tol = std::max(2, r.mesh.n_nodes() / 100);
        if (sweep >= 2 && delta <= tol && prev_delta <= tol) {
            settled = true;
            break;
        }
        prev_delta = delta;
        prev_nodes = r.mesh.n_nodes();
    }

    // node-budget trim: quality-limited regions settle with edges slightly
    // below unit length, overshooting the metric's ideal count; drop the
    // most redundant nodes by collapsing the globally shortest metric edges
    if (opts.target_nodes > 0) {
        int limit =
            static_cast<int>(std::ceil(opts.target_nodes * (1.0 + opts.budget_slack)));
        for (int round = 0; round < 20 && r.mesh.n_nodes() > limit; ++round) {
            if (opts.smooth) smooth_pass(w, ms);
            long over = r.mesh.n_nodes() - opts.target_nodes;
            // removing a node from an already-conforming region necessarily
            // creates edges near sqrt(3), so the trim must allow them
            long nc = collapse_pass(w, 1.0, opts.split_above * 4.0 / 3.0, over);
            if (nc == 0) break;
            long nf = flip_pass(w);
            r.collapses += nc;
            r.flips += nf;
            r.mesh = compact_and_build(w);
        }
    }

    r.min_quality = 1e300;
    r.max_quality = -1e300;
    for (const auto& tr : r.mesh.tris()) {
        double q = quality_of(w, tr[0], tr[1], tr[2]);
        r.min_quality = std::min(r.min_quality, q);
        r.max_quality = std::max(r.max_quality, q);
    }
    if (!settled)
        r.warning = "mesh had not settled after " + std::to_string(opts.max_sweeps) +
                    " sweeps";
    if (r.min_quality < opts.min_quality) {
        r.stalled = true;
        if (!r.warning.empty()) r.warning += "; ";
        r.warning += "worst element quality " + std::to_string(r.min_quality) +
                     " is below the floor " + std::to_string(opts.min_quality);
    }
    return r;
}

namespace {

// Locate with the same forgiveness as the solver-side transfers: points that
// fall just outside the donor are accepted at the nearest boundary point
// when the gap is below the local donor mesh size.
Located locate_for_transfer(const TriMesh& from, Vec2 p, int& hint, int node) {
    Located loc = from.locate(p, hint);
    if (!loc.inside) {
        Located snap = from.locate(loc.nearest, hint);
        if (!snap.inside) throw TransferMiss(node);
        Vec2 gap = p - loc.nearest;
        if (std::hypot(gap.x, gap.y) > from.altitude(snap.tri))
            throw TransferMiss(node);
        loc = snap;
    }
    hint = loc.tri;
    return loc;
}

}  // namespace

ScalarField transfer_field(const TriMesh& from, const ScalarField& f,
                           const TriMesh& to) {
    ScalarField out = to.make_scalar_field();
    int hint = 0;
    for (int n = 0; n < to.n_nodes(); ++n)
        out.values[n] = from.value_at(f, locate_for_transfer(from, to.coord(n), hint, n));
    return out;
}

VectorField transfer_field(const TriMesh& from, const VectorField& f,
                           const TriMesh& to) {
    VectorField out = to.make_vector_field();
    int hint = 0;
    for (int n = 0; n < to.n_nodes(); ++n)
        out.values[n] = from.value_at(f, locate_for_transfer(from, to.coord(n), hint, n));
    return out;
}

void append_adapt_stats_csv(const std::string& path, int step, double time,
                            const RemeshResult& r) {
    std::FILE* fp = std::fopen(path.c_str(), "a");
    if (!fp) throw Error("cannot open " + path + " for append");
    if (std::ftell(fp) == 0)
        std::fputs(
            "step,time,nodes,tris,sweeps,splits,collapses,flips,"
            "min_quality,max_quality,stalled\n",
            fp);
    std::fprintf(fp, "%d,%.17g,%d,%d,%d,%ld,%ld,%ld,%.17g,%.17g,%d\n", step,
                 time, r.mesh.n_nodes(), r.mesh.n_tris(), r.sweeps, r.splits,
                 r.collapses, r.flips, r.min_quality, r.max_quality,
                 r.stalled ? 1 : 0);
    std::fclose(fp);
}

}  // namespace aimm
