#pragma once

// Equations of motion and their integration. Hamilton equations under the
// twisted bracket {Px,Py} = B(r):
//   xdot = Px,  ydot = Py,
//   Pxdot = B Py - dV/dx,  Pydot = -B Px - dV/dy.
// The magnetic force does no work, so H is conserved even when Q varies in
// time (used by the Q-sweep).

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "morbit/model.hpp"
#include "morbit/rk.hpp"

namespace morbit {

struct PhaseRate {
    double dx, dy, dpx, dpy;
};

inline Y4 phase_rate(const ModelParams& p, const Y4& y, double q) {
    const double r2 = y[0] * y[0] + y[1] * y[1];
    const double u = r2 + p.r_cal * p.r_cal;
    const double b = -q / (u * u);
    const double f = 4.0 * p.alpha / (u * u * u);  // V'(r)/r
    return {y[2], y[3], b * y[3] - f * y[0], -b * y[2] - f * y[1]};
}

inline PhaseRate derivative(const ModelParams& p, const PhaseState& s) {
    require_finite(s, "derivative");
    const Y4 r = phase_rate(p, {s.x, s.y, s.px, s.py}, p.q);
    return {r[0], r[1], r[2], r[3]};
}

struct IntegrateOptions {
    double tol = 1e-10;     ///< relative (and absolute) local error tolerance
    int n_samples = 1024;   ///< uniformly spaced output samples
};

/// Time-ordered samples of one integration, with the tolerance used and the
/// worst energy drift seen at internal steps.
struct Trajectory {
    ModelParams params;
    std::vector<PhaseState> samples;
    double tol = 0.0;
    double energy_drift = 0.0;
};

namespace detail {

inline void check_tol(double tol) {
    if (!(tol >= 1e-14 && tol <= 1e-3))
        throw DomainError("integrate: tol must lie in [1e-14, 1e-3]");
}

inline PhaseState to_state(const Y4& y, double t) {
    return PhaseState{y[0], y[1], y[2], y[3], t};
}

}  // namespace detail

/// Integrate from s0 for t_max, sampling uniformly via dense output.
inline Trajectory integrate(const ModelParams& p, const PhaseState& s0,
                            double t_max, double tol,
                            int n_samples = 1024) {
    require_finite(s0, "integrate");
    detail::check_tol(tol);
    if (!(t_max > 0.0)) throw DomainError("integrate: t_max must be > 0");
    if (n_samples < 2) n_samples = 2;

    Trajectory traj{p, {}, tol, 0.0};
    traj.samples.reserve(static_cast<size_t>(n_samples));

    const Y4 y0{s0.x, s0.y, s0.px, s0.py};
    const double e0 = hamiltonian(p, s0);

    auto rhs = [&p](double, const Y4& y) { return phase_rate(p, y, p.q); };
    Dopri5<decltype(rhs)> solver(rhs, tol, tol);
    solver.init(s0.t, y0);

    const double t_end = s0.t + t_max;
    int next = 0;
    auto sample_time = [&](int i) {
        return s0.t + t_max * static_cast<double>(i) / (n_samples - 1);
    };
    while (solver.t() < t_end) {
        const DenseStep ds = solver.step(t_end);
        if (!detail::to_state(solver.y(), solver.t()).finite())
            throw NonFiniteState(solver.t());
        const double e = hamiltonian(p, detail::to_state(solver.y(), solver.t()));
        traj.energy_drift = std::max(traj.energy_drift, std::abs(e - e0));
        while (next < n_samples && sample_time(next) <= ds.t0 + ds.h) {
            traj.samples.push_back(
                detail::to_state(ds.eval(sample_time(next)), sample_time(next)));
            ++next;
        }
    }
    while (next < n_samples) {  // numerical endpoint guard
        traj.samples.push_back(detail::to_state(solver.y(), solver.t()));
        ++next;
    }
    return traj;
}

class Unbound : public Error {
  public:
    explicit Unbound(double r)
        : Error("measure_period: orbit exceeded the escape radius (r = " +
                std::to_string(r) + ")") {}
};

class NoReturn : public Error {
  public:
    explicit NoReturn(double budget)
        : Error("measure_period: no phase-space return within budget t = " +
                std::to_string(budget)) {}
};

struct PeriodOptions {
    double escape_radius_factor = 1e3;  ///< times r_cal
    double budget_factor = 1e4;         ///< times the expected period
    double return_tol = 1e-4;           ///< scaled full-state distance
};

/// First-return time to s0 in full phase space. Crossings of the section
/// through s0 normal to P0 are located on the dense output and accepted when
/// the full state matches within the event tolerance.
inline double measure_period(const ModelParams& p, const PhaseState& s0,
                             double tol, PeriodOptions opt = {}) {
    require_finite(s0, "measure_period");
    detail::check_tol(tol);

    const Vec2 p0 = s0.mom();
    const double pnorm = p0.norm();
    if (pnorm == 0.0)
        throw DomainError("measure_period: initial momentum is zero");
    const Vec2 u = p0 / pnorm;

    // expected time scale: the E=0 period formula when on-shell, else a
    // Kepler-like guess from L_z
    const double e0 = hamiltonian(p, s0);
    const double g = gauge_scalar(p, s0.r2());
    const double lz = s0.pos().cross(s0.mom()) + 0.5 * g;
    double t_scale;
    if (std::abs(e0) < 1e-6 * p.energy_scale() && std::abs(lz) > 1e-12) {
        t_scale = M_PI * (p.alpha + 0.5 * p.q * lz) / std::pow(std::abs(lz), 3);
        if (!(t_scale > 0.0)) t_scale = p.r_cal * p.r_cal / std::abs(lz);
    } else if (std::abs(lz) > 1e-12) {
        t_scale = p.r_cal * p.r_cal / std::abs(lz);
    } else {
        t_scale = p.r_cal / e0_speed(p, s0.r2());
    }
    const double budget = opt.budget_factor * t_scale;
    const double r_escape = opt.escape_radius_factor * p.r_cal;
    const double pos_scale = std::max(p.r_cal, s0.r());
    const double mom_scale = pnorm;

    auto section = [&](const Y4& y) {
        return (y[0] - s0.x) * u.x + (y[1] - s0.y) * u.y;
    };
    auto state_dist = [&](const Y4& y) {
        const double dx = (y[0] - s0.x) / pos_scale;
        const double dy = (y[1] - s0.y) / pos_scale;
        const double dpx = (y[2] - s0.px) / mom_scale;
        const double dpy = (y[3] - s0.py) / mom_scale;
        return std::sqrt(dx * dx + dy * dy + dpx * dpx + dpy * dpy);
    };

    auto rhs = [&p](double, const Y4& y) { return phase_rate(p, y, p.q); };
    Dopri5<decltype(rhs)> solver(rhs, tol, tol);
    solver.init(s0.t, {s0.x, s0.y, s0.px, s0.py});

    bool armed = false;  // arm once the section function has gone negative
    double s_prev = 0.0, t_prev = s0.t;
    const double t_end = s0.t + budget;
    const int nsub = 8;
    while (solver.t() < t_end) {
        const DenseStep ds = solver.step(t_end);
        const Y4& y = solver.y();
        const double r = std::sqrt(y[0] * y[0] + y[1] * y[1]);
        if (r > r_escape) throw Unbound(r);
        for (int j = 1; j <= nsub; ++j) {
            const double tj = ds.t0 + ds.h * j / nsub;
            const double sj = section(ds.eval(tj));
            if (armed && s_prev < 0.0 && sj >= 0.0) {
                double ta = t_prev, tb = tj, sa = s_prev;
                for (int it = 0; it < 128; ++it) {
                    const double tm = 0.5 * (ta + tb);
                    if (tm == ta || tm == tb) break;
                    const double sm = section(ds.eval(std::max(tm, ds.t0)));
                    if ((sa < 0.0) == (sm < 0.0)) {
                        ta = tm;
                        sa = sm;
                    } else {
                        tb = tm;
                    }
                }
                const double tc = 0.5 * (ta + tb);
                if (state_dist(ds.eval(std::max(tc, ds.t0))) <= opt.return_tol)
                    return tc - s0.t;
            }
            if (sj < 0.0) armed = true;
            s_prev = sj;
            t_prev = tj;
        }
    }
    throw NoReturn(budget);
}

}  // namespace morbit
