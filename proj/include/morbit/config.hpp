#pragma once

// JSON run configuration. Parsing validates everything up front and returns
// the full list of problems, not just the first.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "morbit/model.hpp"

namespace morbit {

struct OrbitConfig {
    double x = 2.0, y = 0.0;
    double heading_deg = 90.0;
};

struct IntegrateConfig {
    double tol = 1e-10;
    double t_max = 0.0;  ///< 0: one predicted period
    int samples = 1024;
    int periods = 1;
};

struct AlgebraConfig {
    int n_samples = 1000;
    double h = 1e-5;
    bool richardson = false;
};

struct FluxConfig {
    double r_max_factor = 1e3;  ///< times r_cal
    int n = 4096;
};

struct SweepConfig {
    double q_from = 0.0;
    double q_to = 2.0;
    double rate = 0.002;
    double lz_flip_threshold = 0.15;
};

struct QuantumConfig {
    int i_level = 1;
    int m_charge = 0;
    int sector = 1;           ///< m for spectrum/zero-mode commands
    double r_min_factor = 1e-4;
    double r_max_factor = 1e4;
    int n_nodes = 4096;
    int k = 6;
    double tol = 1e-5;
    bool uniform_grid = false;
};

struct OutputConfig {
    bool csv = true;
    bool json = true;
    bool plot = true;
};

struct RunConfig {
    double alpha = 2.0;
    double r_cal = 1.0;
    double q = 0.0;
    unsigned long long seed = 12345;
    OrbitConfig orbit;
    IntegrateConfig integrate;
    AlgebraConfig algebra;
    FluxConfig flux;
    SweepConfig sweep;
    QuantumConfig quantum;
    OutputConfig output;

    ModelParams params() const { return ModelParams(alpha, r_cal, q); }
};

struct ConfigResult {
    std::optional<RunConfig> config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty() && config.has_value(); }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed,
                       std::vector<std::string>& errs) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known)
            errs.push_back(path + ": unknown key '" + it.key() + "'");
    }
}

template <class T>
inline void get_num(const json& j, const std::string& path, const char* key,
                    T& out, std::vector<std::string>& errs) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    const std::string label = path.empty() ? key : path + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) {
            errs.push_back(label + ": expected a boolean");
            return;
        }
    } else {
        if (!v.is_number()) {
            errs.push_back(label + ": expected a number");
            return;
        }
    }
    out = v.get<T>();
}

}  // namespace detail

inline ConfigResult parse_config(const std::string& text) {
    using nlohmann::json;
    ConfigResult res;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        res.errors.push_back(std::string("syntax error: ") + e.what());
        return res;
    }
    if (!j.is_object()) {
        res.errors.push_back("top level: expected a JSON object");
        return res;
    }
    RunConfig c;
    auto& errs = res.errors;
    detail::check_keys(j, "top level",
                       {"alpha", "r_cal", "q", "seed", "orbit", "integrate",
                        "algebra", "flux", "sweep", "quantum", "output"},
                       errs);
    detail::get_num(j, "", "alpha", c.alpha, errs);
    detail::get_num(j, "", "r_cal", c.r_cal, errs);
    detail::get_num(j, "", "q", c.q, errs);
    detail::get_num(j, "", "seed", c.seed, errs);
    if (!(c.alpha > 0.0)) errs.push_back("alpha: must be > 0");
    if (!(c.r_cal > 0.0)) errs.push_back("r_cal: must be > 0");
    if (!std::isfinite(c.q)) errs.push_back("q: must be finite");

    if (j.contains("orbit")) {
        const auto& o = j.at("orbit");
        if (!o.is_object()) {
            errs.push_back("orbit: expected an object");
        } else {
            detail::check_keys(o, "orbit", {"x", "y", "heading_deg"}, errs);
            detail::get_num(o, "orbit", "x", c.orbit.x, errs);
            detail::get_num(o, "orbit", "y", c.orbit.y, errs);
            detail::get_num(o, "orbit", "heading_deg", c.orbit.heading_deg, errs);
        }
    }
    if (j.contains("integrate")) {
        const auto& o = j.at("integrate");
        if (!o.is_object()) {
            errs.push_back("integrate: expected an object");
        } else {
            detail::check_keys(o, "integrate", {"tol", "t_max", "samples", "periods"},
                               errs);
            detail::get_num(o, "integrate", "tol", c.integrate.tol, errs);
            detail::get_num(o, "integrate", "t_max", c.integrate.t_max, errs);
            detail::get_num(o, "integrate", "samples", c.integrate.samples, errs);
            detail::get_num(o, "integrate", "periods", c.integrate.periods, errs);
            if (!(c.integrate.tol >= 1e-14 && c.integrate.tol <= 1e-3))
                errs.push_back("integrate.tol: must lie in [1e-14, 1e-3]");
            if (c.integrate.samples < 2)
                errs.push_back("integrate.samples: must be >= 2");
        }
    }
    if (j.contains("algebra")) {
        const auto& o = j.at("algebra");
        if (!o.is_object()) {
            errs.push_back("algebra: expected an object");
        } else {
            detail::check_keys(o, "algebra", {"n_samples", "h", "richardson"}, errs);
            detail::get_num(o, "algebra", "n_samples", c.algebra.n_samples, errs);
            detail::get_num(o, "algebra", "h", c.algebra.h, errs);
            detail::get_num(o, "algebra", "richardson", c.algebra.richardson, errs);
            if (c.algebra.n_samples < 1)
                errs.push_back("algebra.n_samples: must be >= 1");
            if (!(c.algebra.h > 0.0)) errs.push_back("algebra.h: must be > 0");
        }
    }
    if (j.contains("flux")) {
        const auto& o = j.at("flux");
        if (!o.is_object()) {
            errs.push_back("flux: expected an object");
        } else {
            detail::check_keys(o, "flux", {"r_max_factor", "n"}, errs);
            detail::get_num(o, "flux", "r_max_factor", c.flux.r_max_factor, errs);
            detail::get_num(o, "flux", "n", c.flux.n, errs);
            if (!(c.flux.r_max_factor > 0.0))
                errs.push_back("flux.r_max_factor: must be > 0");
            if (c.flux.n < 16) errs.push_back("flux.n: must be >= 16");
        }
    }
    if (j.contains("sweep")) {
        const auto& o = j.at("sweep");
        if (!o.is_object()) {
            errs.push_back("sweep: expected an object");
        } else {
            detail::check_keys(o, "sweep",
                               {"q_from", "q_to", "rate", "lz_flip_threshold"},
                               errs);
            detail::get_num(o, "sweep", "q_from", c.sweep.q_from, errs);
            detail::get_num(o, "sweep", "q_to", c.sweep.q_to, errs);
            detail::get_num(o, "sweep", "rate", c.sweep.rate, errs);
            detail::get_num(o, "sweep", "lz_flip_threshold",
                            c.sweep.lz_flip_threshold, errs);
            if (!(c.sweep.rate > 0.0)) errs.push_back("sweep.rate: must be > 0");
        }
    }
    if (j.contains("quantum")) {
        const auto& o = j.at("quantum");
        if (!o.is_object()) {
            errs.push_back("quantum: expected an object");
        } else {
            detail::check_keys(o, "quantum",
                               {"i_level", "m_charge", "sector", "r_min_factor",
                                "r_max_factor", "n_nodes", "k", "tol",
                                "uniform_grid"},
                               errs);
            detail::get_num(o, "quantum", "i_level", c.quantum.i_level, errs);
            detail::get_num(o, "quantum", "m_charge", c.quantum.m_charge, errs);
            detail::get_num(o, "quantum", "sector", c.quantum.sector, errs);
            detail::get_num(o, "quantum", "r_min_factor", c.quantum.r_min_factor,
                            errs);
            detail::get_num(o, "quantum", "r_max_factor", c.quantum.r_max_factor,
                            errs);
            detail::get_num(o, "quantum", "n_nodes", c.quantum.n_nodes, errs);
            detail::get_num(o, "quantum", "k", c.quantum.k, errs);
            detail::get_num(o, "quantum", "tol", c.quantum.tol, errs);
            detail::get_num(o, "quantum", "uniform_grid", c.quantum.uniform_grid,
                            errs);
            if (c.quantum.i_level < 1)
                errs.push_back("quantum.i_level: must be >= 1");
            if (c.quantum.n_nodes < 64)
                errs.push_back("quantum.n_nodes: must be >= 64");
            if (!(c.quantum.tol > 0.0))
                errs.push_back("quantum.tol: must be > 0");
        }
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        if (!o.is_object()) {
            errs.push_back("output: expected an object");
        } else {
            detail::check_keys(o, "output", {"csv", "json", "plot"}, errs);
            detail::get_num(o, "output", "csv", c.output.csv, errs);
            detail::get_num(o, "output", "json", c.output.json, errs);
            detail::get_num(o, "output", "plot", c.output.plot, errs);
        }
    }
    if (errs.empty()) res.config = c;
    return res;
}

}  // namespace morbit
