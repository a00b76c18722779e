// monopole-orbits: configuration-driven experiment runner for the magnetized
// off-center circular-orbit system.
//
// Exit codes: 0 all checks passed, 1 check failure, 2 configuration error,
// 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "morbit/morbit.hpp"

namespace {

const char* const kCommands[] = {
    "simulate",  "period",  "algebra-check",     "geometry",
    "stability", "hodograph", "stereo",          "flux",
    "sweep-q",   "quantum-zero-mode", "quantum-count", "quantum-spectrum"};

int run_one(const std::string& command, const std::string& config_path,
            const std::string& out_dir, long long seed_override,
            const std::string& format, int plot_override) {
    std::ifstream f(config_path);
    if (!f) {
        std::cerr << "error: cannot read config file '" << config_path << "'\n";
        return 2;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    auto parsed = morbit::parse_config(ss.str());
    if (!parsed.ok()) {
        std::cerr << "configuration errors:\n";
        for (const auto& e : parsed.errors) std::cerr << "  - " << e << "\n";
        return 2;
    }
    morbit::RunConfig cfg = *parsed.config;
    if (seed_override >= 0)
        cfg.seed = static_cast<unsigned long long>(seed_override);
    if (format == "csv") { cfg.output.csv = true; cfg.output.json = false; }
    else if (format == "json") { cfg.output.csv = false; cfg.output.json = true; }
    else if (format == "both") { cfg.output.csv = true; cfg.output.json = true; }
    if (plot_override == 0) cfg.output.plot = false;
    if (plot_override == 1) cfg.output.plot = true;

    try {
        const auto rep = morbit::run_command(cfg, command, out_dir);
        for (const auto& c : rep.checks) {
            std::printf("[%s] %-28s value=%-14.6g threshold=%-12.6g %s\n",
                        c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                        c.threshold, c.detail.c_str());
        }
        std::printf("%s: %s (%.2f s)\n", command.c_str(),
                    rep.all_passed() ? "all checks passed" : "CHECKS FAILED",
                    rep.wall_time_s);
        return rep.all_passed() ? 0 : 1;
    } catch (const morbit::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const morbit::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"magnetized off-center circular orbits: simulation and checks"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = "out";
    long long seed_override = -1;
    std::string format = "both";
    int plot_override = -1;

    app.add_option("--config", config_path, "JSON configuration file")
        ->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--format", format, "csv|json|both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    auto* plot_on = app.add_flag("--plot", "emit SVG plots");
    auto* plot_off = app.add_flag("--no-plot", "suppress SVG plots");

    std::string chosen;
    for (const char* name : kCommands) {
        auto* sub = app.add_subcommand(name);
        sub->callback([&chosen, name] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);
    if (plot_on->count()) plot_override = 1;
    if (plot_off->count()) plot_override = 0;

    return run_one(chosen, config_path, out_dir, seed_override, format,
                   plot_override);
}
