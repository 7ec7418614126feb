#include "aimm/driver/cases.hpp"

#include <cmath>

#include "aimm/core/errors.hpp"

namespace aimm {

namespace {

// background rectangle sized so the structured node count lands near n
TriMesh sized_rect(double x0, double y0, double x1, double y1, int n) {
    double aspect = (x1 - x0) / (y1 - y0);
    int nx = std::max(2, int(std::lround(std::sqrt(double(n) * aspect))) - 1);
    int ny = std::max(2, int(std::lround(double(nx + 1) / aspect)) - 1);
    return structured_rect(x0, y0, x1, y1, nx, ny);
}

std::function<Vec2(Vec2, double)> fixed(Vec2 v) {
    return [v](Vec2, double) { return v; };
}

CaseDefinition bending_beam_1() {
    CaseDefinition d;
    d.name = "bending_beam_1";
    d.fluid_mat = {2.0, 0.2};
    d.solid_mat = SolidMaterial::from_mu_lambda(10.0, 5000.0, 2000.0);

    d.defaults.dt = 0.1;
    d.defaults.t_end = 80.0;
    d.defaults.target_nodes = 4000;
    d.defaults.h_min = 0.02;
    d.defaults.h_max = 4.0;

    d.fluid_mesh = sized_rect(0.0, 0.0, 80.0, 20.0, d.defaults.target_nodes);
    d.fluid_bcs.dirichlet[btag::kLeft] = fixed({1.0, 0.0});
    d.fluid_bcs.slip = {btag::kBottom, btag::kTop};

    // beam 1 wide, 10 tall, clamped on the channel floor at x = 20
    d.solid_mesh = structured_rect(19.5, 0.0, 20.5, 10.0, 2, 20);
    d.solid_bcs.dirichlet[btag::kBottom] = fixed({0.0, 0.0});
    d.traction_exclude = {btag::kBottom};
    d.control_point = {20.0, 10.0};
    return d;
}

CaseDefinition plate_vibration() {
    CaseDefinition d;
    d.name = "plate_vibration";
    d.fluid_mat = {1000.0, 0.001};
    d.solid_mat = SolidMaterial::from_E_nu(1000.0, 5000.0, 0.49);

    d.defaults.dt = 0.005;
    d.defaults.t_end = 15.0;
    d.defaults.target_nodes = 30000;
    d.defaults.h_min = 5e-5;
    d.defaults.h_max = 2e-3;

    d.fluid_mesh = sized_rect(0.0, 0.0, 0.2, 0.02, d.defaults.target_nodes);
    d.fluid_bcs.dirichlet[btag::kLeft] = [](Vec2, double t) {
        return Vec2{0.015 * std::sin(2.0 * M_PI * t), 0.0};
    };
    d.fluid_bcs.dirichlet[btag::kBottom] = fixed({0.0, 0.0});
    d.fluid_bcs.dirichlet[btag::kTop] = fixed({0.0, 0.0});

    // plate 0.002 wide, 0.016 tall, centered in the channel
    d.solid_mesh = structured_rect(0.099, 0.0, 0.101, 0.016, 2, 16);
    d.solid_bcs.dirichlet[btag::kBottom] = fixed({0.0, 0.0});
    d.traction_exclude = {btag::kBottom};
    d.control_point = {0.101, 0.016};
    return d;
}

CaseDefinition turek(bool fsi3) {
    CaseDefinition d;
    d.name = fsi3 ? "turek_fsi3" : "turek_fsi2";
    d.fluid_mat = {1000.0, 1.0};
    d.solid_mat = fsi3 ? SolidMaterial::from_mu_lambda(1000.0, 2e6, 8e6)
                       : SolidMaterial::from_mu_lambda(10000.0, 5e5, 2e6);

    d.defaults.dt = fsi3 ? 5e-4 : 4e-3;
    d.defaults.t_end = 15.0;
    d.defaults.target_nodes = 20000;
    d.defaults.h_min = 5e-4;
    d.defaults.h_max = 0.08;

    const double H = 0.41;
    const double u_bar = fsi3 ? 2.0 : 1.0;
    d.fluid_mesh = sized_rect(0.0, 0.0, 2.5, H, d.defaults.target_nodes);
    d.fluid_bcs.dirichlet[btag::kLeft] = [u_bar, H](Vec2 p, double t) {
        return Vec2{inlet_profile_turek(p.y, u_bar, H) * ramp_factor(t), 0.0};
    };
    d.fluid_bcs.dirichlet[btag::kBottom] = fixed({0.0, 0.0});
    d.fluid_bcs.dirichlet[btag::kTop] = fixed({0.0, 0.0});

    // flag 0.35 x 0.02 behind the cylinder, tip at (0.6, 0.2); the left edge
    // sits on the chord where the flag meets the circle r = 0.05 at (0.2,0.2)
    d.rigid.present = true;
    d.rigid.center = {0.2, 0.2};
    d.rigid.radius = 0.05;
    d.rigid.splice_tag = btag::kLeft;
    d.rigid.arc_tag = 9;
    d.rigid.arc_segments = 128;
    double xl = 0.2 + std::sqrt(0.05 * 0.05 - 0.01 * 0.01);
    d.solid_mesh = structured_rect(xl, 0.19, 0.6, 0.21, 44, 4);
    d.solid_bcs.dirichlet[btag::kLeft] = fixed({0.0, 0.0});
    d.traction_exclude = {btag::kLeft};
    d.control_point = {0.6, 0.2};
    return d;
}

}  // namespace

std::vector<std::string> case_names() {
    return {"bending_beam_1", "plate_vibration", "turek_fsi2", "turek_fsi3"};
}

bool is_case_name(const std::string& name) {
    for (const std::string& c : case_names())
        if (c == name) return true;
    return false;
}

CaseDefinition make_case(const std::string& name) {
    if (name == "bending_beam_1") return bending_beam_1();
    if (name == "plate_vibration") return plate_vibration();
    if (name == "turek_fsi2") return turek(false);
    if (name == "turek_fsi3") return turek(true);
    std::string known;
    for (const std::string& c : case_names()) known += "\n  " + c;
    throw ConfigError("unknown case '" + name + "'; available cases:" + known);
}

CaseDefinition make_case(const RunSpec& spec) {
    if (spec.case_name.empty())
        throw ConfigError("no case selected ([geometry] case = ... is required)");
    CaseDefinition d = make_case(spec.case_name);

    if (spec.fluid_rho) d.fluid_mat.rho_f = *spec.fluid_rho;
    if (spec.fluid_mu) d.fluid_mat.mu_f = *spec.fluid_mu;

    bool en = spec.solid_E || spec.solid_nu;
    bool ml = spec.solid_mu || spec.solid_lambda;
    if (en && ml)
        throw ConfigError("[solid]: give either E + nu or mu + lambda, not a mix");
    double rho = spec.solid_rho ? *spec.solid_rho : d.solid_mat.rho0;
    if (en) {
        if (!(spec.solid_E && spec.solid_nu))
            throw ConfigError("[solid]: E and nu must be given together");
        d.solid_mat = SolidMaterial::from_E_nu(rho, *spec.solid_E, *spec.solid_nu);
    } else if (ml) {
        double mu = spec.solid_mu ? *spec.solid_mu : d.solid_mat.mu_s;
        double lambda = spec.solid_lambda
                            ? *spec.solid_lambda
                            : d.solid_mat.kappa - 2.0 * d.solid_mat.mu_s / 3.0;
        d.solid_mat = SolidMaterial::from_mu_lambda(rho, mu, lambda);
    } else {
        d.solid_mat.rho0 = rho;
    }

    apply_overrides(spec, d.defaults);
    return d;
}

}  // namespace aimm
