#pragma once

// Adiabatic Q-sweep: integrate with Q(t) ramped linearly and fit the orbit
// geometry over windows of one (locally predicted) period. H is conserved
// exactly under the ramp (the magnetic force does no work), so every
// snapshot stays on the E = 0 stratum; L_z and J evolve.

#include <cmath>
#include <vector>

#include "morbit/dynamics.hpp"
#include "morbit/geometry.hpp"
#include "morbit/model.hpp"

namespace morbit {

struct QSweepRecord {
    double q = 0.0;          ///< Q at the window midpoint
    OrbitGeometry geometry;  ///< circle fit over the window
    double t = 0.0;          ///< window start time
};

struct SweepOptions {
    double tol = 1e-10;
    int samples_per_window = 256;
    double lz_flip_threshold = 0.15;  ///< |L_z| signal level, times |L_z(0)|
};

struct SweepResult {
    std::vector<QSweepRecord> records;
    bool adiabaticity_warning = false;  ///< |dQ per orbit| > 0.01 (|Q|+1)
    bool branch_flip = false;  ///< |L_z| fell below threshold (or changed sign):
                               ///< the orbital sense must flip to continue
    double branch_flip_t = 0.0;
    double branch_flip_q = 0.0;
};

/// Sweep Q from q_from to q_to at |dQ/dt| = rate, fitting one circle per
/// orbital period. s0 must be an E = 0 state of the q_from model.
inline SweepResult sweep_q(const ModelParams& params, const PhaseState& s0,
                           double q_from, double q_to, double rate,
                           SweepOptions opt = {}) {
    if (!(rate > 0.0)) throw DomainError("sweep_q: rate must be > 0");
    if (q_to == q_from) throw DomainError("sweep_q: empty sweep");
    require_finite(s0, "sweep_q");

    const ModelParams p0(params.alpha, params.r_cal, q_from);
    if (std::abs(hamiltonian(p0, s0)) > 1e-6 * p0.energy_scale())
        throw DomainError("sweep_q: s0 must be an E = 0 state at q_from");
    const double dir = q_to > q_from ? 1.0 : -1.0;
    const double t_total = std::abs(q_to - q_from) / rate;

    auto q_of_t = [&](double t) {
        const double q = q_from + dir * rate * t;
        return dir > 0 ? std::min(q, q_to) : std::max(q, q_to);
    };
    auto rhs = [&](double t, const Y4& y) {
        return phase_rate(p0, y, q_of_t(t));
    };

    SweepResult out;
    Dopri5<decltype(rhs)> solver(rhs, opt.tol, opt.tol);
    solver.init(0.0, {s0.x, s0.y, s0.px, s0.py});

    auto lz_of = [&](const Y4& y, double t) {
        const ModelParams pq(params.alpha, params.r_cal, q_of_t(t));
        PhaseState s{y[0], y[1], y[2], y[3], t};
        return constants_of_motion(pq, s).l_z;
    };

    const double lz0 = lz_of(solver.y(), 0.0);
    const double flip_level = opt.lz_flip_threshold * std::abs(lz0);
    int last_sign = lz0 >= 0.0 ? +1 : -1;

    double t = 0.0;
    while (t < t_total - 1e-12 * t_total) {
        const double qn = q_of_t(t);
        const double lz = lz_of(solver.y(), t);
        if (!out.branch_flip &&
            (std::abs(lz) < flip_level ||
             (lz >= 0.0 ? +1 : -1) != last_sign)) {
            out.branch_flip = true;
            out.branch_flip_t = t;
            out.branch_flip_q = qn;
        }
        last_sign = lz >= 0.0 ? +1 : -1;

        double t_win = period_formula(ModelParams(params.alpha, params.r_cal, qn),
                                      lz);
        if (!(t_win > 0.0) || !std::isfinite(t_win)) break;
        if (rate * t_win > 0.01 * (std::abs(qn) + 1.0))
            out.adiabaticity_warning = true;
        const double t_end = std::min(t + t_win, t_total);

        // sample this window through the dense output
        Trajectory win{ModelParams(params.alpha, params.r_cal, qn), {}, opt.tol,
                       0.0};
        const int ns = opt.samples_per_window;
        int next = 0;
        auto t_sample = [&](int i) {
            return t + (t_end - t) * static_cast<double>(i) / (ns - 1);
        };
        win.samples.push_back(
            PhaseState{solver.y()[0], solver.y()[1], solver.y()[2],
                       solver.y()[3], t});
        ++next;
        while (solver.t() < t_end) {
            const DenseStep ds = solver.step(t_end);
            while (next < ns && t_sample(next) <= ds.t0 + ds.h) {
                const Y4 y = ds.eval(t_sample(next));
                win.samples.push_back(
                    PhaseState{y[0], y[1], y[2], y[3], t_sample(next)});
                ++next;
            }
        }
        if (t_end - t > 0.5 * t_win && win.samples.size() > 16) {
            QSweepRecord rec;
            rec.t = t;
            rec.q = q_of_t(0.5 * (t + t_end));
            rec.geometry = fit_circle(win);
            out.records.push_back(rec);
        }
        t = t_end;
    }
    return out;
}

}  // namespace morbit
