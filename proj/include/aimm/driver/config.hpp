#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aimm/core/tensor.hpp"

namespace aimm {

// Knobs of the coupled run: time stepping, sub-iteration control, fluid-mesh
// adaptation and outputs. Cases ship their own defaults; a config file and
// command-line flags override them.
struct CouplingConfig {
    // [time]
    double dt = 0.01;
    double t_end = 1.0;

    // [coupling]
    int subiter_max = 20;
    double tol_fsi = 1e-6;  // relative interface-velocity change between passes
    bool aitken = true;     // dynamic load relaxation; false = fixed omega0
    double omega0 = 0.5;
    bool one_way = false;   // fluid sees the solid, loads are never applied

    // [adapt]
    bool adapt = true;
    int adapt_interval = 5;  // committed steps between remeshes
    int target_nodes = 5000;
    double h_min = 1e-4;
    double h_max = 1.0;
    double trunc_E = 0.0;  // level-set truncation band; 0 picks it from the mesh

    // [output]
    std::string out_dir = "out";
    int vtk_every = 0;  // field dumps every k-th step; 0 = off
    int csv_every = 1;
    int checkpoint_every = 0;  // 0 = off
    std::vector<Vec2> probes;  // fluid v,p sample points -> probes.csv
    unsigned long seed = 0;    // recorded; reserved for perturbation studies

    void validate() const;  // throws ConfigError
};

// A parsed config file: the case selection plus every override it carried.
// Absent fields keep the case defaults (CLI flags are applied on top).
struct RunSpec {
    std::string case_name;  // [geometry] case=...

    std::optional<double> fluid_rho, fluid_mu;
    std::optional<double> solid_rho, solid_mu, solid_lambda, solid_E, solid_nu;

    std::optional<double> dt, t_end, tol_fsi, omega0, h_min, h_max, trunc_E;
    std::optional<int> subiter_max, adapt_interval, target_nodes;
    std::optional<int> vtk_every, csv_every, checkpoint_every;
    std::optional<bool> aitken, one_way, adapt;
    std::optional<std::string> out_dir;
    std::optional<unsigned long> seed;
    std::optional<std::vector<Vec2>> probes;
};

// INI-style: [section] headers, key = value pairs, '#' or ';' comments.
// Recognized sections: [fluid] [solid] [geometry] [time] [coupling] [adapt]
// [output]. Unknown sections or keys are hard errors (ConfigError), as are
// malformed values.
RunSpec parse_run_spec(std::istream& in, const std::string& origin = "config");
RunSpec parse_run_spec_file(const std::string& path);

// folds the overrides of `spec` into a config (materials are handled by the
// case library)
void apply_overrides(const RunSpec& spec, CouplingConfig& cfg);

}  // namespace aimm
