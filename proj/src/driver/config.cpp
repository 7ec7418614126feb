#include "aimm/driver/config.hpp"

#include <fstream>
#include <sstream>

#include "aimm/core/errors.hpp"

namespace aimm {

void CouplingConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(dt > 0.0)) fail("dt must be positive");
    if (!(t_end > 0.0)) fail("t_end must be positive");
    if (subiter_max < 1) fail("subiter_max must be at least 1");
    if (!(tol_fsi > 0.0)) fail("tol_fsi must be positive");
    if (!(omega0 > 0.0 && omega0 <= 1.0)) fail("omega must be in (0, 1]");
    if (adapt_interval < 1) fail("adapt interval must be at least 1");
    if (target_nodes < 4) fail("adapt nodes must be at least 4");
    if (!(h_min > 0.0)) fail("h_min must be positive");
    if (!(h_max >= h_min)) fail("h_max must be at least h_min");
    if (!(trunc_E >= 0.0)) fail("truncation must be nonnegative");
    if (vtk_every < 0) fail("vtk_every must be nonnegative");
    if (csv_every < 1) fail("csv_every must be at least 1");
    if (checkpoint_every < 0) fail("checkpoint_every must be nonnegative");
    if (out_dir.empty()) fail("output dir must not be empty");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Cursor {
    const std::string& origin;
    int line = 0;
    std::string section, key;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(origin + " line " + std::to_string(line) + ": " + msg);
    }
    [[noreturn]] void bad_value(const std::string& value) const {
        fail("bad value '" + value + "' for key '" + key + "' in [" + section + "]");
    }

    double num(const std::string& v) const {
        try {
            std::size_t used = 0;
            double d = std::stod(v, &used);
            if (used != v.size()) bad_value(v);
            return d;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            bad_value(v);
        }
    }
    int integer(const std::string& v) const {
        double d = num(v);
        int i = int(d);
        if (double(i) != d) bad_value(v);
        return i;
    }
    bool boolean(const std::string& v) const {
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        bad_value(v);
    }
    // "x,y; x,y; ..."
    std::vector<Vec2> points(const std::string& v) const {
        std::vector<Vec2> pts;
        std::stringstream list(v);
        std::string item;
        while (std::getline(list, item, ';')) {
            item = trim(item);
            if (item.empty()) continue;
            std::size_t comma = item.find(',');
            if (comma == std::string::npos) bad_value(v);
            pts.push_back({num(trim(item.substr(0, comma))),
                           num(trim(item.substr(comma + 1)))});
        }
        return pts;
    }
};

}  // namespace

RunSpec parse_run_spec(std::istream& in, const std::string& origin) {
    RunSpec spec;
    Cursor at{origin};
    std::string raw;

    while (std::getline(in, raw)) {
        ++at.line;
        std::size_t hash = raw.find_first_of("#;");
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') at.fail("unterminated section header");
            at.section = trim(line.substr(1, line.size() - 2));
            static const char* known[] = {"fluid", "solid", "geometry", "time",
                                          "coupling", "adapt", "output"};
            bool ok = false;
            for (const char* s : known) ok = ok || at.section == s;
            if (!ok) at.fail("unknown section [" + at.section + "]");
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string::npos) at.fail("expected 'key = value'");
        at.key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (at.key.empty()) at.fail("empty key");
        if (at.section.empty()) at.fail("key '" + at.key + "' outside any section");

        const std::string& k = at.key;
        if (at.section == "fluid") {
            if (k == "rho") spec.fluid_rho = at.num(val);
            else if (k == "mu") spec.fluid_mu = at.num(val);
            else at.fail("unknown key '" + k + "' in [fluid]");
        } else if (at.section == "solid") {
            if (k == "rho") spec.solid_rho = at.num(val);
            else if (k == "mu") spec.solid_mu = at.num(val);
            else if (k == "lambda") spec.solid_lambda = at.num(val);
            else if (k == "E") spec.solid_E = at.num(val);
            else if (k == "nu") spec.solid_nu = at.num(val);
            else at.fail("unknown key '" + k + "' in [solid]");
        } else if (at.section == "geometry") {
            if (k == "case") spec.case_name = val;
            else at.fail("unknown key '" + k + "' in [geometry]");
        } else if (at.section == "time") {
            if (k == "dt") spec.dt = at.num(val);
            else if (k == "t_end") spec.t_end = at.num(val);
            else at.fail("unknown key '" + k + "' in [time]");
        } else if (at.section == "coupling") {
            if (k == "subiter_max") spec.subiter_max = at.integer(val);
            else if (k == "tol_fsi") spec.tol_fsi = at.num(val);
            else if (k == "relaxation") {
                if (val == "aitken") spec.aitken = true;
                else if (val == "fixed") spec.aitken = false;
                else at.bad_value(val);
            } else if (k == "omega") spec.omega0 = at.num(val);
            else if (k == "one_way") spec.one_way = at.boolean(val);
            else at.fail("unknown key '" + k + "' in [coupling]");
        } else if (at.section == "adapt") {
            if (k == "enabled") spec.adapt = at.boolean(val);
            else if (k == "interval") spec.adapt_interval = at.integer(val);
            else if (k == "nodes") spec.target_nodes = at.integer(val);
            else if (k == "h_min") spec.h_min = at.num(val);
            else if (k == "h_max") spec.h_max = at.num(val);
            else if (k == "truncation") spec.trunc_E = at.num(val);
            else at.fail("unknown key '" + k + "' in [adapt]");
        } else if (at.section == "output") {
            if (k == "dir") spec.out_dir = val;
            else if (k == "vtk_every") spec.vtk_every = at.integer(val);
            else if (k == "csv_every") spec.csv_every = at.integer(val);
            else if (k == "checkpoint_every") spec.checkpoint_every = at.integer(val);
            else if (k == "probes") spec.probes = at.points(val);
            else if (k == "seed") spec.seed = static_cast<unsigned long>(at.num(val));
            else at.fail("unknown key '" + k + "' in [output]");
        }
    }
    return spec;
}

RunSpec parse_run_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_run_spec(in, path);
}

void apply_overrides(const RunSpec& s, CouplingConfig& c) {
    if (s.dt) c.dt = *s.dt;
    if (s.t_end) c.t_end = *s.t_end;
    if (s.subiter_max) c.subiter_max = *s.subiter_max;
    if (s.tol_fsi) c.tol_fsi = *s.tol_fsi;
    if (s.aitken) c.aitken = *s.aitken;
    if (s.omega0) c.omega0 = *s.omega0;
    if (s.one_way) c.one_way = *s.one_way;
    if (s.adapt) c.adapt = *s.adapt;
    if (s.adapt_interval) c.adapt_interval = *s.adapt_interval;
    if (s.target_nodes) c.target_nodes = *s.target_nodes;
    if (s.h_min) c.h_min = *s.h_min;
    if (s.h_max) c.h_max = *s.h_max;
    if (s.trunc_E) c.trunc_E = *s.trunc_E;
    if (s.out_dir) c.out_dir = *s.out_dir;
    if (s.vtk_every) c.vtk_every = *s.vtk_every;
    if (s.csv_every) c.csv_every = *s.csv_every;
    if (s.checkpoint_every) c.checkpoint_every = *s.checkpoint_every;
    if (s.probes) c.probes = *s.probes;
    if (s.seed) c.seed = *s.seed;
}

}  // namespace aimm
