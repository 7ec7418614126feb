#include "aimm/driver/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "aimm/adapt/metric.hpp"
#include "aimm/core/errors.hpp"
#include "aimm/core/mesh_io.hpp"
#include "aimm/driver/summary.hpp"

namespace aimm {

namespace {

// Replace the run of spliced segments (the solid's clamped edge) with the
// complementary arc of the rigid disk, walked counter-clockwise so the
// composite loop keeps the body on its left.
InterfacePolyline splice_arc(const InterfacePolyline& poly, const RigidDisk& disk) {
    const int n = poly.n_segments();
    int count = 0;
    for (int t : poly.seg_tags) count += t == disk.splice_tag ? 1 : 0;
    if (count == 0) throw Error("rigid splice: no segment carries the splice tag");
    if (count == n) throw Error("rigid splice: every segment carries the splice tag");

    int start = -1;
    for (int i = 0; i < n; ++i) {
        int prev = (i + n - 1) % n;
        if (poly.seg_tags[i] == disk.splice_tag &&
            poly.seg_tags[prev] != disk.splice_tag) {
            if (start >= 0) throw Error("rigid splice: clamped edge is not contiguous");
            start = i;
        }
    }
    for (int i = 0; i < count; ++i)
        if (poly.seg_tags[(start + i) % n] != disk.splice_tag)
            throw Error("rigid splice: clamped edge is not contiguous");

    // kept chain runs from the corner where the clamped run ends (B) around
    // to the corner where it starts (A); the arc then closes A -> B
    InterfacePolyline out;
    out.closed = true;
    for (int j = 0; j < n - count; ++j) {
        int seg = (start + count + j) % n;
        out.pts.push_back(poly.a(seg));
        out.seg_tags.push_back(poly.seg_tags[seg]);
        out.seg_nodes.push_back(poly.seg_nodes[seg]);
    }
    Vec2 A = poly.a(start);
    Vec2 B = out.pts.front();
    out.pts.push_back(A);

    Vec2 c = disk.center;
    double tha = std::atan2(A.y - c.y, A.x - c.x);
    double thb = std::atan2(B.y - c.y, B.x - c.x);
    double dth = thb - tha;
    const double two_pi = 6.283185307179586;
    while (dth <= 0.0) dth += two_pi;
    int m = std::max(8, disk.arc_segments);
    for (int k = 1; k < m; ++k) {
        double th = tha + dth * double(k) / double(m);
        out.pts.push_back({c.x + disk.radius * std::cos(th),
                           c.y + disk.radius * std::sin(th)});
    }
    for (int k = 0; k < m; ++k) {
        out.seg_tags.push_back(disk.arc_tag);
        out.seg_nodes.push_back({-1, -1});
    }
    out.validate();
    return out;
}

}  // namespace

FsiDriver::FsiDriver(CaseDefinition def, CouplingConfig cfg)
    : def_(std::move(def)), cfg_(std::move(cfg)) {
    cfg_.validate();
    def_.fluid_mat.validate();
    def_.solid_mat.validate();
    def_.fluid_bcs.validate();
    def_.solid_bcs.validate();
    if (def_.fluid_mesh.n_nodes() == 0 || def_.solid_mesh.n_nodes() == 0)
        throw ConfigError("case '" + def_.name + "' is missing a mesh");

    solid_ = std::make_unique<SolidSolver>(def_.solid_mesh, def_.solid_mat,
                                           def_.solid_bcs);
    ss_ = solid_->initial_state();
    fluid_ = std::make_unique<FluidSolver>(def_.fluid_mesh, def_.fluid_mat,
                                           def_.fluid_bcs);
    fs_ = fluid_->initial_state();

    double best = 1e300;
    for (int n = 0; n < def_.solid_mesh.n_nodes(); ++n) {
        double d = (def_.solid_mesh.coords()[n] - def_.control_point).norm();
        if (d < best) {
            best = d;
            tip_node_ = n;
        }
    }
}

Vec2 FsiDriver::tip_displacement() const { return ss_.u[tip_node_]; }

void FsiDriver::rebuild_fluid_solver() {
    FluidBCs bcs = def_.fluid_bcs;  // immersion constraints are re-imposed per pass
    fluid_ = std::make_unique<FluidSolver>(fs_.mesh, def_.fluid_mat, std::move(bcs));
}

InterfacePolyline FsiDriver::composite_interface() const {
    InterfacePolyline poly = extract_polyline(ss_);
    if (!def_.rigid.present) return poly;
    return splice_arc(poly, def_.rigid);
}

LevelSet FsiDriver::level_set() const {
    InterfacePolyline comp = composite_interface();
    double E = cfg_.trunc_E > 0.0 ? cfg_.trunc_E : default_truncation(fs_.mesh, comp);
    return signed_distance(fs_.mesh, comp, E);
}

Vec2 FsiDriver::interface_load() const {
    InterfacePolyline comp = composite_interface();
    return interface_force(fs_, def_.fluid_mat, comp.pts, true);
}

std::vector<std::pair<int, Vec2>> FsiDriver::immersion_constraints(
    const LevelSet& ls) const {
    if (!def_.rigid.present) return velocity_continuity(fs_.mesh, ls, ss_);

    // mask the disk out of the level set so the solid-side transfer only
    // sees flag nodes, then pin every disk node to zero
    LevelSet masked = ls;
    std::vector<char> in_disk(fs_.mesh.n_nodes(), 0);
    for (int n = 0; n < fs_.mesh.n_nodes(); ++n) {
        Vec2 d = fs_.mesh.coords()[n] - def_.rigid.center;
        if (d.norm() <= def_.rigid.radius) {
            in_disk[n] = 1;
            masked.alpha.values[n] = ls.E;
        }
    }
    auto cons = velocity_continuity(fs_.mesh, masked, ss_);
    for (int n = 0; n < fs_.mesh.n_nodes(); ++n)
        if (in_disk[n]) cons.push_back({n, Vec2{0.0, 0.0}});
    return cons;
}

std::vector<double> FsiDriver::interface_velocity(const SolidState& s) const {
    std::vector<double> out;
    for (int n = 0; n < def_.solid_mesh.n_nodes(); ++n) {
        if (!def_.solid_mesh.node_on_boundary(n)) continue;
        out.push_back(s.v[n].x);
        out.push_back(s.v[n].y);
    }
    return out;
}

StepLog FsiDriver::advance() {
    const double dt = cfg_.dt;
    const FluidState fluid_at_t = fs_;
    const SolidState solid_at_t = ss_;

    std::vector<double> v_prev = interface_velocity(solid_at_t);
    std::vector<Vec2> applied(std::size_t(def_.solid_mesh.n_nodes()), Vec2{});
    std::vector<Vec2> r_prev;
    double omega = cfg_.omega0;
    double res_prev = 1e300;
    int grow = 0;

    StepLog log;
    for (int k = 1; k <= cfg_.subiter_max; ++k) {
        // fluid sees the newest solid iterate through the level set
        LevelSet ls = level_set();
        fluid_->bcs().immersed = immersion_constraints(ls);
        fs_ = fluid_at_t;
        FluidStepResult fr = fluid_->step(fs_, dt);
        log.newton_fluid = fr.newton.iterations;

        if (!cfg_.one_way) {
            InterfacePolyline poly = extract_polyline(ss_);
            auto samples =
                extract_traction(fs_, def_.fluid_mat, poly, def_.traction_exclude);
            std::vector<Vec2> g =
                traction_nodal_loads(def_.solid_mesh.n_nodes(), poly, samples);
            if (k == 1) {
                applied = std::move(g);  // first pass is applied unrelaxed
            } else {
                std::vector<Vec2> r(g.size());
                for (std::size_t i = 0; i < g.size(); ++i) r[i] = g[i] - applied[i];
                if (!cfg_.aitken) {
                    omega = cfg_.omega0;
                } else if (k >= 3) {
                    double num = 0.0, den = 0.0;
                    for (std::size_t i = 0; i < r.size(); ++i) {
                        Vec2 dr = r[i] - r_prev[i];
                        num += r_prev[i].dot(dr);
                        den += dr.dot(dr);
                    }
                    if (den > 0.0) omega = std::clamp(-omega * num / den, 0.05, 1.0);
                }
                for (std::size_t i = 0; i < r.size(); ++i)
                    applied[i] = applied[i] + r[i] * omega;
                r_prev = std::move(r);
            }
            solid_->bcs().nodal_load = applied;
        }

        ss_ = solid_at_t;
        SolidStepResult sr = solid_->step(ss_, dt);
        log.newton_solid = sr.newton.iterations;

        std::vector<double> v_now = interface_velocity(ss_);
        double dn = 0.0, vn = 0.0;
        for (std::size_t i = 0; i < v_now.size(); ++i) {
            double d = v_now[i] - v_prev[i];
            dn += d * d;
            vn += v_now[i] * v_now[i];
        }
        dn = std::sqrt(dn);
        vn = std::sqrt(vn);
        double res = dn == 0.0 ? 0.0 : dn / std::max(vn, 1e-30);
        v_prev = std::move(v_now);

        log.subiters = k;
        log.residual = res;
        if (res <= cfg_.tol_fsi) break;
        if (res > res_prev) {
            if (++grow >= 3)
                throw CouplingDiverged(
                    "interface residual grew 3 sub-iterations in a row at t = " +
                    std::to_string(fs_.time) + " (residual " + std::to_string(res) +
                    ")");
        } else {
            grow = 0;
        }
        res_prev = res;
    }

    ++step_;
    log.t = fs_.time;
    log.tip_u = ss_.u[tip_node_];
    log.force = interface_load();
    log.nodes = fs_.mesh.n_nodes();
    return log;
}

std::optional<RemeshResult> FsiDriver::maybe_adapt(int step) {
    if (!cfg_.adapt) return std::nullopt;
    if (step % cfg_.adapt_interval != 0) return std::nullopt;

    LevelSet ls = level_set();
    ScalarField vx = fs_.mesh.make_scalar_field();
    ScalarField vy = fs_.mesh.make_scalar_field();
    for (int n = 0; n < fs_.mesh.n_nodes(); ++n) {
        vx.values[n] = fs_.v.values[n].x;
        vy.values[n] = fs_.v.values[n].y;
    }

    MetricOpts mo;
    mo.target_nodes = cfg_.target_nodes;
    mo.h_min = cfg_.h_min;
    mo.h_max = cfg_.h_max;
    MetricResult mr = build_metric(fs_.mesh, {&ls.alpha, &vx, &vy}, mo);

    RemeshOpts ro;
    ro.target_nodes = cfg_.target_nodes;
    RemeshResult rr = remesh_to_metric(fs_.mesh, mr.metric, ro);

    VectorField v = transfer_field(fs_.mesh, fs_.v, rr.mesh);
    ScalarField p = transfer_field(fs_.mesh, fs_.p, rr.mesh);
    fs_.mesh = rr.mesh;
    fs_.v = std::move(v);
    fs_.p = std::move(p);
    rebuild_fluid_solver();
    return rr;
}

// ---- checkpointing ----

namespace {

constexpr char kMagic[8] = {'A', 'I', 'M', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCkptVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint64_t n = v.size();
    put(out, n);
    out.write(reinterpret_cast<const char*>(v.data()),
              std::streamsize(n * sizeof(T)));
}
template <class T>
void get(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error("checkpoint: truncated file");
}
template <class T>
void get_vec(std::istream& in, std::vector<T>& v) {
    std::uint64_t n = 0;
    get(in, n);
    if (n > (1ull << 32)) throw Error("checkpoint: corrupt array length");
    v.resize(std::size_t(n));
    in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(T)));
    if (!in) throw Error("checkpoint: truncated file");
}

}  // namespace

std::uint64_t FsiDriver::config_hash() const {
    std::string s = def_.name;
    char buf[48];
    auto add = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        s += buf;
    };
    add(def_.fluid_mat.rho_f);
    add(def_.fluid_mat.mu_f);
    add(def_.solid_mat.rho0);
    add(def_.solid_mat.mu_s);
    add(def_.solid_mat.kappa);
    add(cfg_.dt);
    add(double(cfg_.subiter_max));
    add(cfg_.tol_fsi);
    add(cfg_.aitken ? 1.0 : 0.0);
    add(cfg_.omega0);
    add(cfg_.one_way ? 1.0 : 0.0);
    add(cfg_.adapt ? 1.0 : 0.0);
    add(double(cfg_.adapt_interval));
    add(double(cfg_.target_nodes));
    add(cfg_.h_min);
    add(cfg_.h_max);
    add(cfg_.trunc_E);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void FsiDriver::save_checkpoint(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint '" + path + "'");
    out.write(kMagic, sizeof kMagic);
    put(out, kCkptVersion);
    put(out, config_hash());
    put(out, std::int32_t(step_));
    put(out, fs_.time);
    put(out, ss_.time);

    put_vec(out, fs_.mesh.coords());
    put_vec(out, fs_.mesh.tris());
    put_vec(out, fs_.mesh.tri_tags());
    std::uint64_t nb = fs_.mesh.boundary_tags().size();
    put(out, nb);
    for (const auto& [edge, tag] : fs_.mesh.boundary_tags()) {
        put(out, std::int32_t(edge.first));
        put(out, std::int32_t(edge.second));
        put(out, std::int32_t(tag));
    }
    put_vec(out, fs_.v.values);
    put_vec(out, fs_.p.values);

    put_vec(out, ss_.X);
    put_vec(out, ss_.u);
    put_vec(out, ss_.v);
    put_vec(out, ss_.a);
    put_vec(out, ss_.p);
    out.flush();
    if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

void FsiDriver::load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw Error("'" + path + "' is not a checkpoint file");
    std::uint32_t version = 0;
    get(in, version);
    if (version != kCkptVersion)
        throw Error("checkpoint version " + std::to_string(version) +
                    " is not supported");
    std::uint64_t hash = 0;
    get(in, hash);
    if (hash != config_hash())
        throw ConfigError("checkpoint '" + path +
                          "' was written with a different case or config");

    std::int32_t step = 0;
    get(in, step);
    double tf = 0, ts = 0;
    get(in, tf);
    get(in, ts);

    std::vector<Vec2> coords;
    std::vector<std::array<int, 3>> tris;
    std::vector<int> ttags;
    get_vec(in, coords);
    get_vec(in, tris);
    get_vec(in, ttags);
    std::uint64_t nb = 0;
    get(in, nb);
    TriMesh::BoundaryTags btags;
    for (std::uint64_t i = 0; i < nb; ++i) {
        std::int32_t a = 0, b = 0, tag = 0;
        get(in, a);
        get(in, b);
        get(in, tag);
        btags[{int(a), int(b)}] = int(tag);
    }
    TriMesh mesh = TriMesh::build(std::move(coords), std::move(tris),
                                  std::move(btags), std::move(ttags));

    VectorField v = mesh.make_vector_field();
    ScalarField p = mesh.make_scalar_field();
    get_vec(in, v.values);
    get_vec(in, p.values);
    if (int(v.values.size()) != mesh.n_nodes() || int(p.values.size()) != mesh.n_nodes())
        throw Error("checkpoint: fluid field sizes do not match the mesh");

    SolidState snew = solid_->initial_state();
    get_vec(in, snew.X);
    get_vec(in, snew.u);
    get_vec(in, snew.v);
    get_vec(in, snew.a);
    get_vec(in, snew.p);
    const std::size_t ns = std::size_t(def_.solid_mesh.n_nodes());
    if (snew.X.size() != ns || snew.u.size() != ns || snew.v.size() != ns ||
        snew.a.size() != ns || snew.p.size() != ns)
        throw Error("checkpoint: solid state sizes do not match the case");

    std::vector<Vec2> current(ns);
    for (std::size_t i = 0; i < ns; ++i) current[i] = snew.X[i] + snew.u[i];
    snew.mesh = def_.solid_mesh.with_coords(std::move(current));
    snew.time = ts;

    fs_.mesh = std::move(mesh);
    fs_.v = std::move(v);
    fs_.p = std::move(p);
    fs_.time = tf;
    ss_ = std::move(snew);
    step_ = int(step);
    rebuild_fluid_solver();
}

// ---- the full run loop ----

namespace {

std::string fmt_num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_vtk_dumps(const FsiDriver& drv, const std::string& dir, int step) {
    char name[48];
    const FluidState& f = drv.fluid();
    LevelSet ls = drv.level_set();
    VtkWriter wf(f.mesh);
    wf.add("velocity", f.v);
    wf.add("pressure", f.p);
    wf.add("alpha", ls.alpha);
    std::snprintf(name, sizeof name, "/fluid_%06d.vtk", step);
    wf.write_file(dir + name);

    const SolidState& s = drv.solid();
    VectorField u = s.mesh.make_vector_field();
    u.values = s.u;
    VectorField v = s.mesh.make_vector_field();
    v.values = s.v;
    ScalarField p = s.mesh.make_scalar_field();
    p.values = s.p;
    VtkWriter ws(s.mesh);
    ws.add("displacement", u);
    ws.add("velocity", v);
    ws.add("pressure", p);
    ws.add_cell("detF", drv.solid_solver().det_F(s));
    std::snprintf(name, sizeof name, "/solid_%06d.vtk", step);
    ws.write_file(dir + name);
}

}  // namespace

int run_case(const CaseDefinition& def, const CouplingConfig& cfg,
             const std::string& resume) {
    std::filesystem::create_directories(cfg.out_dir);
    FsiDriver drv(def, cfg);
    if (!resume.empty()) drv.load_checkpoint(resume);

    auto path = [&](const std::string& f) { return cfg.out_dir + "/" + f; };
    const int n_steps = std::max(1, int(std::lround(cfg.t_end / cfg.dt)));

    std::ofstream csv(path("timeseries.csv"));
    if (!csv) throw Error("cannot write '" + path("timeseries.csv") + "'");
    csv << "t,tip_ux,tip_uy,drag,lift,newton_fluid,newton_solid,subiters,nodes\n";

    std::ofstream probes;
    if (!cfg.probes.empty()) {
        probes.open(path("probes.csv"));
        probes << "t";
        for (std::size_t i = 0; i < cfg.probes.size(); ++i)
            probes << ",p" << i << "_vx,p" << i << "_vy,p" << i << "_p";
        probes << "\n";
    }

    auto on_adapt = [&](int step, const std::optional<RemeshResult>& rr) {
        if (!rr) return;
        append_adapt_stats_csv(path("adapt_stats.csv"), step, drv.fluid().time, *rr);
    };

    if (resume.empty()) on_adapt(0, drv.maybe_adapt(0));

    std::vector<double> T, UX, UY, DR, LI;
    for (int s = drv.steps_done(); s < n_steps; ++s) {
        StepLog log = drv.advance();
        on_adapt(drv.steps_done(), drv.maybe_adapt(drv.steps_done()));

        T.push_back(log.t);
        UX.push_back(log.tip_u.x);
        UY.push_back(log.tip_u.y);
        DR.push_back(log.force.x);
        LI.push_back(log.force.y);

        int done = s + 1;
        if (done % cfg.csv_every == 0 || done == n_steps) {
            csv << fmt_num(log.t) << ',' << fmt_num(log.tip_u.x) << ','
                << fmt_num(log.tip_u.y) << ',' << fmt_num(log.force.x) << ','
                << fmt_num(log.force.y) << ',' << log.newton_fluid << ','
                << log.newton_solid << ',' << log.subiters << ',' << log.nodes
                << '\n';
            csv.flush();
            if (probes.is_open()) {
                probes << fmt_num(log.t);
                for (Vec2 pt : cfg.probes) {
                    Located loc = drv.fluid().mesh.locate(pt);
                    double vx = std::nan(""), vy = vx, pp = vx;
                    if (loc.inside) {
                        Vec2 vv = drv.fluid().mesh.value_at(drv.fluid().v, loc);
                        vx = vv.x;
                        vy = vv.y;
                        pp = drv.fluid().mesh.value_at(drv.fluid().p, loc);
                    }
                    probes << ',' << fmt_num(vx) << ',' << fmt_num(vy) << ','
                           << fmt_num(pp);
                }
                probes << '\n';
                probes.flush();
            }
        }
        if (cfg.vtk_every > 0 && done % cfg.vtk_every == 0)
            write_vtk_dumps(drv, cfg.out_dir, done);
        if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) {
            char name[48];
            std::snprintf(name, sizeof name, "checkpoint_%06d.ckpt", done);
            drv.save_checkpoint(path(name));
        }
    }

    std::vector<SignalSummary> channels;
    if (!T.empty()) {
        channels.push_back(summarize_signal("tip_ux", T, UX));
        channels.push_back(summarize_signal("tip_uy", T, UY));
        channels.push_back(summarize_signal("drag", T, DR));
        channels.push_back(summarize_signal("lift", T, LI));
    }
    std::ofstream sum(path("summary.txt"));
    sum << "case=" << def.name << "\n";
    sum << "steps=" << drv.steps_done() << "\n";
    sum << "t_final=" << fmt_num(drv.fluid().time) << "\n";
    sum << "nodes_final=" << drv.fluid().mesh.n_nodes() << "\n";
    sum << "seed=" << cfg.seed << "\n";
    sum << format_summary(channels);
    return drv.steps_done();
}

}  // namespace aimm
