#pragma once

// Command implementations behind the CLI. Every command reads a RunConfig,
// computes, writes machine-readable artifacts into the output directory and
// returns a RunReport with one entry per check. Outputs are byte-stable for
// a fixed config and seed.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "morbit/config.hpp"
#include "morbit/dynamics.hpp"
#include "morbit/geometry.hpp"
#include "morbit/invariants.hpp"
#include "morbit/model.hpp"
#include "morbit/quantum.hpp"
#include "morbit/stereo.hpp"
#include "morbit/svg.hpp"
#include "morbit/sweep.hpp"

namespace morbit {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct RunReport {
    std::string command;
    nlohmann::json config_echo;
    std::vector<CheckResult> checks;
    std::vector<std::string> artifacts;
    double wall_time_s = 0.0;  ///< not serialized (reports stay byte-stable)

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["command"] = command;
        j["config"] = config_echo;
        j["artifacts"] = artifacts;
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json e;
            e["name"] = c.name;
            e["passed"] = c.passed;
            e["value"] = c.value;
            e["threshold"] = c.threshold;
            if (!c.detail.empty()) e["detail"] = c.detail;
            arr.push_back(e);
        }
        j["checks"] = arr;
        j["passed"] = all_passed();
        return j;
    }
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["alpha"] = c.alpha;
    j["r_cal"] = c.r_cal;
    j["q"] = c.q;
    j["seed"] = c.seed;
    j["orbit"] = {{"x", c.orbit.x}, {"y", c.orbit.y},
                  {"heading_deg", c.orbit.heading_deg}};
    j["integrate"] = {{"tol", c.integrate.tol}, {"t_max", c.integrate.t_max},
                      {"samples", c.integrate.samples},
                      {"periods", c.integrate.periods}};
    j["algebra"] = {{"n_samples", c.algebra.n_samples}, {"h", c.algebra.h},
                    {"richardson", c.algebra.richardson}};
    j["flux"] = {{"r_max_factor", c.flux.r_max_factor}, {"n", c.flux.n}};
    j["sweep"] = {{"q_from", c.sweep.q_from}, {"q_to", c.sweep.q_to},
                  {"rate", c.sweep.rate},
                  {"lz_flip_threshold", c.sweep.lz_flip_threshold}};
    j["quantum"] = {{"i_level", c.quantum.i_level},
                    {"m_charge", c.quantum.m_charge},
                    {"sector", c.quantum.sector},
                    {"r_min_factor", c.quantum.r_min_factor},
                    {"r_max_factor", c.quantum.r_max_factor},
                    {"n_nodes", c.quantum.n_nodes},
                    {"k", c.quantum.k},
                    {"tol", c.quantum.tol},
                    {"uniform_grid", c.quantum.uniform_grid}};
    j["output"] = {{"csv", c.output.csv}, {"json", c.output.json},
                   {"plot", c.output.plot}};
    return j;
}

inline void write_text(const std::string& path, const std::string& text,
                       RunReport& rep) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open output file " + path);
    f << text;
    rep.artifacts.push_back(path);
}

inline void write_trajectory_csv(const std::string& path, const ModelParams& p,
                                 const Trajectory& traj, RunReport& rep) {
    std::string out = "t,x,y,px,py,E,Lz,Jx,Jy\n";
    for (const auto& s : traj.samples) {
        const auto con = constants_of_motion(p, s);
        out += fmt17(s.t) + "," + fmt17(s.x) + "," + fmt17(s.y) + "," +
               fmt17(s.px) + "," + fmt17(s.py) + "," + fmt17(con.energy) + "," +
               fmt17(con.l_z) + "," + fmt17(con.j.x) + "," + fmt17(con.j.y) +
               "\n";
    }
    write_text(path, out, rep);
}

inline void add_check(RunReport& rep, const std::string& name, double value,
                      double threshold, bool passed,
                      const std::string& detail = "") {
    rep.checks.push_back(CheckResult{name, passed, value, threshold, detail});
}

inline void add_leq(RunReport& rep, const std::string& name, double value,
                    double threshold, const std::string& detail = "") {
    add_check(rep, name, value, threshold, value <= threshold, detail);
}

inline PhaseState orbit_state(const RunConfig& c) {
    const ModelParams p = c.params();
    return make_e0_state(p, c.orbit.x, c.orbit.y,
                         c.orbit.heading_deg * M_PI / 180.0);
}

inline void plot_orbit(const std::string& path, const ModelParams& p,
                       const Trajectory& traj, RunReport& rep) {
    double ext = 1.5 * p.r_cal;
    for (const auto& s : traj.samples)
        ext = std::max({ext, std::abs(s.x), std::abs(s.y)});
    ext *= 1.1;
    SvgPlot plot(-ext, ext, -ext, ext);
    plot.circle({0, 0}, p.r_cal, "#bbbbbb");
    plot.circle({0, 0}, 0.01 * ext, "#000000", true);
    std::vector<Vec2> pts;
    for (const auto& s : traj.samples) pts.push_back(s.pos());
    plot.polyline(pts, "#cc2222");
    plot.write(path);
    rep.artifacts.push_back(path);
}

}  // namespace detail

// --------------------------------------------------------------------------
// individual commands
// --------------------------------------------------------------------------

inline void cmd_simulate(const RunConfig& c, const std::string& dir,
                         RunReport& rep) {
    const ModelParams p = c.params();
    const PhaseState s0 = detail::orbit_state(c);
    const auto con0 = constants_of_motion(p, s0);
    double t_max = c.integrate.t_max;
    if (!(t_max > 0.0)) {
        const double tp = period_formula(p, con0.l_z);
        t_max = (std::isfinite(tp) && tp > 0.0 ? tp : 10.0 * p.r_cal) *
                std::max(1, c.integrate.periods);
    }
    const auto traj = integrate(p, s0, t_max, c.integrate.tol,
                                c.integrate.samples);
    detail::add_leq(rep, "energy_drift", traj.energy_drift,
                    100.0 * c.integrate.tol *
                        std::max(1.0, std::abs(con0.energy)));
    double lz_drift = 0.0, j_drift = 0.0;
    for (const auto& s : traj.samples) {
        const auto con = constants_of_motion(p, s);
        lz_drift = std::max(lz_drift, std::abs(con.l_z - con0.l_z));
        j_drift = std::max(j_drift, (con.j - con0.j).norm());
    }
    if (std::abs(con0.energy) < 1e-8 * p.energy_scale()) {
        detail::add_leq(rep, "Lz_drift", lz_drift,
                        1e-7 * (std::abs(con0.l_z) + 1.0));
        detail::add_leq(rep, "J_drift", j_drift, 1e-7 * (con0.j.norm() + 1.0));
    } else {
        detail::add_leq(rep, "Lz_drift", lz_drift,
                        1e-7 * (std::abs(con0.l_z) + 1.0),
                        "L_z is conserved at every energy");
    }
    if (c.output.csv)
        detail::write_trajectory_csv(dir + "/trajectory.csv", p, traj, rep);
    if (c.output.plot) detail::plot_orbit(dir + "/orbit.svg", p, traj, rep);
}

inline void cmd_period(const RunConfig& c, const std::string& dir,
                       RunReport& rep) {
    (void)dir;
    const ModelParams p = c.params();
    const PhaseState s0 = detail::orbit_state(c);
    const auto con0 = constants_of_motion(p, s0);
    const double t_pred = period_formula(p, con0.l_z);
    const double t_meas = measure_period(p, s0, c.integrate.tol);
    const double rel = std::abs(t_meas - t_pred) / t_pred;
    detail::add_leq(rep, "period_rel_error", rel, 1e-6,
                    "measured " + detail::fmt17(t_meas) + " vs predicted " +
                        detail::fmt17(t_pred));
}

inline void cmd_algebra_check(const RunConfig& c, const std::string& dir,
                              RunReport& rep) {
    (void)dir;
    const ModelParams p = c.params();
    BracketOptions opt;
    opt.h = c.algebra.h;
    opt.richardson = c.algebra.richardson;
    const auto report = verify_algebra(p, c.algebra.n_samples, c.seed, opt);
    detail::add_leq(rep, "bracket_Lz_H", report.res_lz_h, 1e-6);
    detail::add_leq(rep, "bracket_J_Lz", report.res_j_lz, 1e-6);
    detail::add_leq(rep, "bracket_Jx_Jy_central", report.res_central, 1e-6);
    detail::add_leq(rep, "bracket_J_H", report.res_j_h, 1e-6,
                    std::string("detected sign: {J,H} = ") +
                        (report.jh_sign > 0 ? "+" : "-") + "4H e_z x r");
    // pointwise Casimir identity on the same sample cloud
    std::mt19937_64 rng(c.seed);
    double worst = 0.0;
    for (int i = 0; i < c.algebra.n_samples; ++i) {
        const auto s = random_phase_point(p, rng);
        const auto con = constants_of_motion(p, s);
        worst = std::max(worst, std::abs(con.c2_lhs - con.c2_rhs) /
                                    (1.0 + std::abs(con.c2_rhs)));
    }
    detail::add_leq(rep, "casimir_identity", worst, 1e-11);
}

inline void cmd_geometry(const RunConfig& c, const std::string& dir,
                         RunReport& rep) {
    const ModelParams p = c.params();
    const PhaseState s0 = detail::orbit_state(c);
    const auto pred = predict_geometry(p, s0);
    const auto traj =
        integrate(p, s0, pred.period_pred, c.integrate.tol, c.integrate.samples);
    const auto fit = fit_circle(traj);
    detail::add_leq(rep, "fit_residual", fit.fit_residual, 1e-6 * p.r_cal);
    detail::add_leq(rep, "center_match", (fit.center - pred.center).norm(),
                    1e-5 * p.r_cal);
    detail::add_leq(rep, "radius_match",
                    std::abs(fit.radius_r - pred.radius_r), 1e-5 * p.r_cal);
    const auto res = constraint_residuals(p, traj);
    const double rc2 = p.r_cal * p.r_cal;
    detail::add_leq(rep, "constraint_radial", res.max_radial, 1e-7 * rc2);
    detail::add_leq(rep, "constraint_cross", res.max_cross, 1e-7 * rc2);
    if (c.output.csv)
        detail::write_trajectory_csv(dir + "/trajectory.csv", p, traj, rep);
    if (c.output.plot) detail::plot_orbit(dir + "/orbit.svg", p, traj, rep);
}

inline void cmd_stability(const RunConfig& c, const std::string& dir,
                          RunReport& rep) {
    const ModelParams p = c.params();
    const int n = 2000;
    const double a_lo = 0.05 * p.r_cal, a_hi = 20.0 * p.r_cal;
    std::string csv = "a,det_m\n";
    int sign_changes = 0;
    double prev = 0.0, root_at = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = a_lo + (a_hi - a_lo) * i / (n - 1);
        const double det = stability_determinant(p, a, 0.0).det_m;
        csv += detail::fmt17(a) + "," + detail::fmt17(det) + "\n";
        if (i > 0 && prev * det < 0.0) {
            ++sign_changes;
            root_at = a;
        }
        prev = det;
    }
    detail::add_check(rep, "detM_single_root", sign_changes, 1.0,
                      sign_changes == 1,
                      "root near a = " + detail::fmt17(root_at));
    detail::add_leq(rep, "detM_root_at_Rcal",
                    std::abs(root_at - p.r_cal), 2.0 * (a_hi - a_lo) / n);
    detail::add_leq(rep, "detM_at_Rcal",
                    std::abs(stability_determinant(p, p.r_cal, 0.0).det_m),
                    1e-12 * p.energy_scale());
    if (c.output.csv) detail::write_text(dir + "/stability.csv", csv, rep);
}

inline void cmd_hodograph(const RunConfig& c, const std::string& dir,
                          RunReport& rep) {
    const ModelParams p = c.params();
    const PhaseState s0 = detail::orbit_state(c);
    const auto geo = predict_geometry(p, s0);
    const auto traj =
        integrate(p, s0, geo.period_pred, c.integrate.tol, c.integrate.samples);
    const auto ell = hodograph_analysis(traj, geo);
    const double eps_pred = hodograph_eccentricity(p, geo);
    if (eps_pred < 1e-6) {
        detail::add_leq(rep, "eccentricity_zero", ell.eccentricity, 1e-6,
                        "centered orbit, circular hodograph");
    } else {
        detail::add_leq(rep, "eccentricity_match",
                        std::abs(ell.eccentricity - eps_pred), 1e-3,
                        "predicted 2Rl/(R^2+Rcal^2+l^2) = " +
                            detail::fmt17(eps_pred));
        detail::add_leq(rep, "axis_perpendicular",
                        hodograph_axis_misalignment(ell, geo), 1e-3);
    }
    if (c.output.plot) {
        double ext = 0.0;
        for (const auto& s : traj.samples)
            ext = std::max({ext, std::abs(s.px), std::abs(s.py)});
        ext *= 1.15;
        SvgPlot plot(-ext, ext, -ext, ext);
        plot.circle({0, 0}, 0.008 * ext, "#000000", true);
        std::vector<Vec2> pts;
        for (const auto& s : traj.samples) pts.push_back(s.mom());
        plot.polyline(pts, "#2222cc");
        plot.write(dir + "/hodograph.svg");
        rep.artifacts.push_back(dir + "/hodograph.svg");
    }
    if (c.output.csv)
        detail::write_trajectory_csv(dir + "/trajectory.csv", p, traj, rep);
}

inline void cmd_stereo(const RunConfig& c, const std::string& dir,
                       RunReport& rep) {
    const ModelParams p = c.params();
    const PhaseState s0 = detail::orbit_state(c);
    const auto geo = predict_geometry(p, s0);
    const auto traj =
        integrate(p, s0, geo.period_pred, c.integrate.tol, c.integrate.samples);
    const auto sc = sphere_circle_analysis(p, traj);
    detail::add_leq(rep, "planarity", sc.planarity_residual, 1e-6 * p.r_cal);
    // conformal factor at a few trajectory points
    double worst = 0.0;
    const size_t stride = std::max<size_t>(1, traj.samples.size() / 16);
    for (size_t i = 0; i < traj.samples.size(); i += stride) {
        const auto& s = traj.samples[i];
        const double pred = std::pow((s.r2() + p.r_cal * p.r_cal) /
                                         (2.0 * p.r_cal * p.r_cal),
                                     2);
        const double meas = metric_ratio(p, s.x, s.y, 1.0, 0.7);
        worst = std::max(worst, std::abs(meas - pred) / pred);
    }
    detail::add_leq(rep, "conformal_factor", worst, 1e-6);
    if (sc.omega_pred)
        detail::add_check(rep, "omega_pred", *sc.omega_pred, 0.0, true,
                          "gamma = " + detail::fmt17(sc.gamma));
    if (c.output.plot) {
        const double ext = 1.25 * p.r_cal;
        SvgPlot plot(-2.1 * ext, 2.1 * ext, -ext, ext, 960, 480);
        // top view (x3, y3) on the left, side view (x3, z3) on the right
        std::vector<Vec2> top, side;
        for (const auto& s : traj.samples) {
            const auto q = project(p, s.x, s.y);
            top.push_back({q.x3 - 1.05 * ext, q.y3});
            side.push_back({q.x3 + 1.05 * ext, q.z3});
        }
        plot.circle({-1.05 * ext, 0}, p.r_cal, "#bbbbbb");
        plot.circle({+1.05 * ext, 0}, p.r_cal, "#bbbbbb");
        plot.polyline(top, "#117711");
        plot.polyline(side, "#117711");
        plot.write(dir + "/sphere.svg");
        rep.artifacts.push_back(dir + "/sphere.svg");
    }
}

inline void cmd_flux(const RunConfig& c, const std::string& dir,
                     RunReport& rep) {
    (void)dir;
    const ModelParams p = c.params();
    const auto mono = monopole_data(p);
    const double flux =
        plane_flux_integral(p, c.flux.r_max_factor * p.r_cal, c.flux.n);
    if (p.q == 0.0) {
        detail::add_leq(rep, "plane_flux_zero", std::abs(flux), 1e-12);
    } else {
        detail::add_leq(rep, "plane_flux_match",
                        std::abs(flux - mono.total_flux) /
                            std::abs(mono.total_flux),
                        1e-5,
                        "quadrature " + detail::fmt17(flux) + " vs -pi Q/Rcal^2 = " +
                            detail::fmt17(mono.total_flux));
    }
    const double rc2 = p.r_cal * p.r_cal;
    detail::add_check(rep, "sphere_field_constant", mono.b_sphere, 0.0,
                      mono.b_sphere == -p.q / (4.0 * rc2 * rc2),
                      "B_sphere = -Q/(4 Rcal^4)");
}

inline void cmd_sweep_q(const RunConfig& c, const std::string& dir,
                        RunReport& rep) {
    const ModelParams p0(c.alpha, c.r_cal, c.sweep.q_from);
    const PhaseState s0 = make_e0_state(p0, c.orbit.x, c.orbit.y,
                                        c.orbit.heading_deg * M_PI / 180.0);
    SweepOptions opt;
    opt.tol = c.integrate.tol;
    opt.lz_flip_threshold = c.sweep.lz_flip_threshold;
    const auto sw = sweep_q(c.params(), s0, c.sweep.q_from, c.sweep.q_to,
                            c.sweep.rate, opt);
    detail::add_check(rep, "snapshots", sw.records.size(), 20.0,
                      sw.records.size() >= 20);
    // collinearity of centers: largest perpendicular deviation from the
    // total-least-squares line
    double max_perp = 0.0;
    if (sw.records.size() >= 2) {
        Vec2 mean{0, 0};
        for (const auto& r : sw.records) mean = mean + r.geometry.center;
        mean = mean / static_cast<double>(sw.records.size());
        double sxx = 0, sxy = 0, syy = 0;
        for (const auto& r : sw.records) {
            const Vec2 d = r.geometry.center - mean;
            sxx += d.x * d.x;
            sxy += d.x * d.y;
            syy += d.y * d.y;
        }
        const double tr = sxx + syy, det = sxx * syy - sxy * sxy;
        const double lam = 0.5 * tr + std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
        Vec2 dirv{sxy, lam - sxx};
        if (dirv.norm() < 1e-30) dirv = {1.0, 0.0};
        dirv = dirv / dirv.norm();
        for (const auto& r : sw.records) {
            const Vec2 d = r.geometry.center - mean;
            max_perp = std::max(max_perp, std::abs(d.cross(dirv)));
        }
    }
    detail::add_leq(rep, "centers_collinear", max_perp, 1e-3 * c.r_cal);
    if (!sw.records.empty()) {
        const auto& last = sw.records.back();
        const ModelParams pend(c.alpha, c.r_cal, last.q);
        const double lz = last.geometry.l_z;
        const double l2 = c.alpha / (2.0 * lz * lz) - c.r_cal * c.r_cal +
                          last.q / (2.0 * lz);
        const double l_pred = std::sqrt(std::max(0.0, l2));
        detail::add_leq(rep, "endpoint_center",
                        std::abs(last.geometry.offset_l - l_pred),
                        1e-2 * c.r_cal,
                        "measured l = " + detail::fmt17(last.geometry.offset_l) +
                            " vs l from R^2-Rcal^2+Q/(2Lz) = " +
                            detail::fmt17(l_pred));
    }
    detail::add_check(rep, "adiabatic", sw.adiabaticity_warning ? 0.0 : 1.0,
                      1.0, true,
                      sw.adiabaticity_warning ? "warning: dQ per orbit > 0.01(|Q|+1)"
                                              : "ramp is adiabatic");
    detail::add_check(rep, "branch_flip", sw.branch_flip ? 1.0 : 0.0, 0.0, true,
                      sw.branch_flip
                          ? "emitted at t = " + detail::fmt17(sw.branch_flip_t) +
                                ", Q = " + detail::fmt17(sw.branch_flip_q)
                          : "not emitted");
    if (c.output.csv) {
        std::string csv = "t,q,center_x,center_y,radius,offset_l,l_z,fit_residual\n";
        for (const auto& r : sw.records) {
            csv += detail::fmt17(r.t) + "," + detail::fmt17(r.q) + "," +
                   detail::fmt17(r.geometry.center.x) + "," +
                   detail::fmt17(r.geometry.center.y) + "," +
                   detail::fmt17(r.geometry.radius_r) + "," +
                   detail::fmt17(r.geometry.offset_l) + "," +
                   detail::fmt17(r.geometry.l_z) + "," +
                   detail::fmt17(r.geometry.fit_residual) + "\n";
        }
        detail::write_text(dir + "/sweep.csv", csv, rep);
    }
    if (c.output.plot && !sw.records.empty()) {
        double ext = 1.5 * c.r_cal;
        for (const auto& r : sw.records)
            ext = std::max(ext, r.geometry.center.norm() + r.geometry.radius_r);
        ext *= 1.1;
        SvgPlot plot(-ext, ext, -ext, ext);
        plot.circle({0, 0}, c.r_cal, "#bbbbbb");
        for (const auto& r : sw.records)
            plot.circle(r.geometry.center, r.geometry.radius_r, "#cc8822", false,
                        0.6);
        std::vector<Vec2> centers;
        for (const auto& r : sw.records) centers.push_back(r.geometry.center);
        plot.polyline(centers, "#cc2222", 1.5);
        plot.write(dir + "/sweep.svg");
        rep.artifacts.push_back(dir + "/sweep.svg");
    }
}

inline RadialGrid grid_from_config(const RunConfig& c) {
    const double rmin = c.quantum.r_min_factor * c.r_cal;
    const double rmax = c.quantum.r_max_factor * c.r_cal;
    return c.quantum.uniform_grid
               ? make_uniform_grid(rmin, rmax, c.quantum.n_nodes)
               : make_log_grid(rmin, rmax, c.quantum.n_nodes);
}

inline void cmd_quantum_zero_mode(const RunConfig& c, const std::string& dir,
                                  RunReport& rep) {
    (void)dir;
    const int I = c.quantum.i_level;
    const double alpha_star = alpha_for_zero_mode(c.r_cal, I, 0);
    const ModelParams p(alpha_star, c.r_cal, 0.0);
    const auto grid = grid_from_config(c);
    const auto op = build_radial_operator(p, I, grid);
    std::vector<double> psi(grid.nodes.size());
    for (size_t i = 0; i < grid.nodes.size(); ++i)
        psi[i] = analytic_zero_mode(p, I, grid.nodes[i]);
    detail::add_leq(rep, "kernel_residual", kernel_residual(op, psi), 1e-6);
    const double e_low = lowest_eigenvalue(op);
    detail::add_leq(rep, "zero_mode_eigenvalue", std::abs(e_low),
                    1e-5 / std::pow(c.r_cal, 4));
    // spectral flow across alpha*
    const ModelParams pm(alpha_star - 0.5, c.r_cal, 0.0);
    const ModelParams pp(alpha_star + 0.5, c.r_cal, 0.0);
    const double e_m = lowest_eigenvalue(build_radial_operator(pm, I, grid));
    const double e_p = lowest_eigenvalue(build_radial_operator(pp, I, grid));
    detail::add_check(rep, "spectral_flow", e_m > 0.0 && e_p < 0.0 ? 1.0 : 0.0,
                      1.0, e_m > 0.0 && e_p < 0.0,
                      "E(alpha*-1/2) = " + detail::fmt17(e_m) +
                          ", E(alpha*+1/2) = " + detail::fmt17(e_p));
}

inline void cmd_quantum_count(const RunConfig& c, const std::string& dir,
                              RunReport& rep) {
    const int I = c.quantum.i_level;
    const int M = c.quantum.m_charge != 0 ? c.quantum.m_charge : 2 * I;
    const auto grid = grid_from_config(c);
    const auto cnt = count_zero_modes(c.params(), I, M, grid, c.quantum.tol);
    detail::add_check(rep, "zero_mode_count", cnt.count, std::abs(M),
                      cnt.count == std::abs(M),
                      "alpha = " + detail::fmt17(cnt.alpha_used) +
                          ", Q = " + detail::fmt17(cnt.q_used));
    // the edge sector m = 2I (M > 0) / m = -2I (M < 0) must be excluded
    const int edge = M > 0 ? 2 * I : -2 * I;
    bool edge_excluded = true;
    for (const auto& s : cnt.sectors)
        if (s.m == edge && s.normalizable > 0) edge_excluded = false;
    detail::add_check(rep, "edge_sector_excluded", edge_excluded ? 1.0 : 0.0,
                      1.0, edge_excluded,
                      "sector m = " + std::to_string(edge));
    const auto cnt_neg =
        count_zero_modes(c.params(), I, -M, grid, c.quantum.tol);
    detail::add_check(rep, "mirror_charge_count", cnt_neg.count, cnt.count,
                      cnt_neg.count == cnt.count, "M -> -M leaves the count");
    if (c.output.csv) {
        std::string csv = "sector_m,states_in_window,normalizable\n";
        for (const auto& s : cnt.sectors)
            csv += std::to_string(s.m) + "," +
                   std::to_string(s.states_in_window) + "," +
                   std::to_string(s.normalizable) + "\n";
        detail::write_text(dir + "/count.csv", csv, rep);
    }
}

inline void cmd_quantum_spectrum(const RunConfig& c, const std::string& dir,
                                 RunReport& rep) {
    const ModelParams p = c.params();
    const auto grid = grid_from_config(c);
    const int span = std::abs(c.quantum.sector);
    std::string csv = "sector_m,index,eigenvalue,tail_slope,normalizable\n";
    double lowest = std::numeric_limits<double>::infinity();
    for (int m = -span; m <= span; ++m) {
        const auto op = build_radial_operator(p, m, grid);
        const auto modes = solve_modes(op, c.quantum.k);
        for (size_t k = 0; k < modes.size(); ++k) {
            csv += std::to_string(m) + "," + std::to_string(k) + "," +
                   detail::fmt17(modes[k].eigenvalue) + "," +
                   detail::fmt17(modes[k].tail_slope) + "," +
                   (modes[k].normalizable ? "1" : "0") + "\n";
            lowest = std::min(lowest, modes[k].eigenvalue);
        }
    }
    detail::add_check(rep, "bound_state_exists", lowest, 0.0, lowest < 0.0,
                      "attractive 2-d well binds for every alpha > 0");
    if (c.output.csv) detail::write_text(dir + "/spectrum.csv", csv, rep);
}

/// Dispatch a named command; writes artifacts under out_dir.
inline RunReport run_command(const RunConfig& c, const std::string& command,
                             const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    RunReport rep;
    rep.command = command;
    rep.config_echo = detail::config_to_json(c);
    const auto t0 = std::chrono::steady_clock::now();

    if (command == "simulate") cmd_simulate(c, out_dir, rep);
    else if (command == "period") cmd_period(c, out_dir, rep);
    else if (command == "algebra-check") cmd_algebra_check(c, out_dir, rep);
    else if (command == "geometry") cmd_geometry(c, out_dir, rep);
    else if (command == "stability") cmd_stability(c, out_dir, rep);
    else if (command == "hodograph") cmd_hodograph(c, out_dir, rep);
    else if (command == "stereo") cmd_stereo(c, out_dir, rep);
    else if (command == "flux") cmd_flux(c, out_dir, rep);
    else if (command == "sweep-q") cmd_sweep_q(c, out_dir, rep);
    else if (command == "quantum-zero-mode")
        cmd_quantum_zero_mode(c, out_dir, rep);
    else if (command == "quantum-count") cmd_quantum_count(c, out_dir, rep);
    else if (command == "quantum-spectrum")
        cmd_quantum_spectrum(c, out_dir, rep);
    else throw DomainError("unknown command '" + command + "'");

    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (c.output.json) {
        std::ofstream f(out_dir + "/report.json", std::ios::binary);
        if (!f) throw Error("cannot open " + out_dir + "/report.json");
        f << rep.to_json().dump(2) << "\n";
        rep.artifacts.push_back(out_dir + "/report.json");
    }
    return rep;
}

}  // namespace morbit
