#pragma once

// Constants of motion and numeric verification of the centrally extended
// Poisson algebra. Brackets are evaluated in kinetic-momentum coordinates
// with the twisted two-form, so no vector potential (and no Dirac string)
// ever appears:
//   {f,g} = f_x g_Px - f_Px g_x + f_y g_Py - f_Py g_y
//           + B(r) (f_Px g_Py - f_Py g_Px).
// In this orientation the measured on-shell relation comes out as
// {J,H} = +4H e_z x r (the global sign is reported, not assumed).

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "morbit/model.hpp"

namespace morbit {

struct ConstantsOfMotion {
    double l_z;     ///< canonical angular momentum
    Vec2 j;         ///< magnetized Runge-Lenz-like vector
    double c2_lhs;  ///< Casimir, algebra side
    double c2_rhs;  ///< Casimir, Hamiltonian side
    double energy;  ///< H
};

inline ConstantsOfMotion constants_of_motion(const ModelParams& p,
                                             const PhaseState& s) {
    require_finite(s, "constants_of_motion");
    const double r2 = s.r2();
    const double g = gauge_scalar(p, r2);
    const Vec2 r = s.pos(), mom = s.mom();
    const double l_z = r.cross(mom) + 0.5 * g;
    const double rp = r.dot(mom);
    const double rc2 = p.r_cal * p.r_cal;
    const Vec2 j = (l_z + 0.5 * g) * r + rp * r.perp() + rc2 * mom.perp();
    const double h = 0.5 * mom.norm2() + potential(p, r2);
    const double c2_lhs =
        j.norm2() / (4.0 * rc2) +
        (l_z - p.q / (4.0 * rc2)) * (l_z - p.q / (4.0 * rc2));
    const double u = r2 + rc2;
    const double c2_rhs = u * u * h / (2.0 * rc2) + p.alpha / (2.0 * rc2) +
                          p.q * p.q / (16.0 * rc2 * rc2);
    return {l_z, j, c2_lhs, c2_rhs, h};
}

/// Scalar observable of the four phase coordinates.
using Observable = std::function<double(const PhaseState&)>;

struct BracketOptions {
    double h = 1e-5;         ///< base finite-difference step
    bool richardson = false; ///< one extrapolation level (h, h/2)
};

namespace detail {

inline PhaseState shifted(const PhaseState& s, int coord, double d) {
    PhaseState out = s;
    switch (coord) {
        case 0: out.x += d; break;
        case 1: out.y += d; break;
        case 2: out.px += d; break;
        default: out.py += d; break;
    }
    return out;
}

inline double coord_of(const PhaseState& s, int coord) {
    switch (coord) {
        case 0: return s.x;
        case 1: return s.y;
        case 2: return s.px;
        default: return s.py;
    }
}

inline std::array<double, 4> gradient(const Observable& f, const PhaseState& s,
                                      double h) {
    std::array<double, 4> g{};
    for (int c = 0; c < 4; ++c) {
        const double hc = h * (1.0 + std::abs(coord_of(s, c)));
        const double fp = f(shifted(s, c, +hc));
        const double fm = f(shifted(s, c, -hc));
        g[c] = (fp - fm) / (2.0 * hc);
        if (!std::isfinite(g[c]))
            throw DomainError("poisson_bracket: non-finite derivative estimate");
    }
    return g;
}

inline double bracket_once(const ModelParams& p, const Observable& f,
                           const Observable& g, const PhaseState& s, double h) {
    const auto gf = gradient(f, s, h);
    const auto gg = gradient(g, s, h);
    const double b = magnetic_field(p, s.r2());
    return gf[0] * gg[2] - gf[2] * gg[0] + gf[1] * gg[3] - gf[3] * gg[1] +
           b * (gf[2] * gg[3] - gf[3] * gg[2]);
}

}  // namespace detail

/// Central-difference evaluation of the twisted bracket {f,g} at s.
inline double poisson_bracket(const ModelParams& p, const Observable& f,
                              const Observable& g, const PhaseState& s,
                              BracketOptions opt = {}) {
    if (!(opt.h > 0.0)) throw DomainError("poisson_bracket: h must be > 0");
    const double d1 = detail::bracket_once(p, f, g, s, opt.h);
    if (!opt.richardson) return d1;
    const double d2 = detail::bracket_once(p, f, g, s, 0.5 * opt.h);
    return (4.0 * d2 - d1) / 3.0;
}

/// Prebuilt observables.
inline Observable obs_lz(const ModelParams& p) {
    return [p](const PhaseState& s) {
        return s.pos().cross(s.mom()) + 0.5 * gauge_scalar(p, s.r2());
    };
}
inline Observable obs_jx(const ModelParams& p) {
    return [p](const PhaseState& s) { return constants_of_motion(p, s).j.x; };
}
inline Observable obs_jy(const ModelParams& p) {
    return [p](const PhaseState& s) { return constants_of_motion(p, s).j.y; };
}
inline Observable obs_h(const ModelParams& p) {
    return [p](const PhaseState& s) { return hamiltonian(p, s); };
}

/// Worst-case normalized residuals of the four bracket relations over a
/// sample of phase points, plus the detected {J,H} sign.
struct AlgebraReport {
    double res_lz_h = 0.0;      ///< {L_z,H} = 0
    double res_j_lz = 0.0;      ///< {J,L_z} = e_z x J
    double res_central = 0.0;   ///< {Jx,Jy} = 4 Rcal^2 L_z - Q
    double res_j_h = 0.0;       ///< {J,H} = sign * 4 H e_z x r
    int jh_sign = +1;           ///< detected global sign of the {J,H} relation
    int n_samples = 0;
};

inline PhaseState random_phase_point(const ModelParams& p,
                                     std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(-3.0 * p.r_cal, 3.0 * p.r_cal);
    const double pscale = 3.0 * std::sqrt(2.0 * p.alpha) / (p.r_cal * p.r_cal);
    std::uniform_real_distribution<double> up(-pscale, pscale);
    return PhaseState{ux(rng), ux(rng), up(rng), up(rng), 0.0};
}

inline AlgebraReport verify_algebra(const ModelParams& p, int n_samples,
                                    unsigned long long seed,
                                    BracketOptions opt = {}) {
    if (n_samples < 1) throw DomainError("verify_algebra: n_samples >= 1");
    AlgebraReport rep;
    rep.n_samples = n_samples;
    std::mt19937_64 rng(seed);

    const auto lz = obs_lz(p), jx = obs_jx(p), jy = obs_jy(p), hh = obs_h(p);
    const double rc2 = p.r_cal * p.r_cal;

    // detect the {J,H} sign on the first sample with a usable magnitude
    double sign_acc = 0.0;
    std::vector<PhaseState> pts;
    pts.reserve(static_cast<size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) pts.push_back(random_phase_point(p, rng));

    for (const auto& s : pts) {
        const auto con = constants_of_motion(p, s);
        const double h_abs = std::abs(con.energy);
        const double jn = con.j.norm() + 1.0;

        const double b_lz_h = poisson_bracket(p, lz, hh, s, opt);
        rep.res_lz_h = std::max(
            rep.res_lz_h, std::abs(b_lz_h) / (1.0 + std::abs(con.l_z) + h_abs));

        const double b_jx_lz = poisson_bracket(p, jx, lz, s, opt);
        const double b_jy_lz = poisson_bracket(p, jy, lz, s, opt);
        const double r1 = std::abs(b_jx_lz - (-con.j.y));
        const double r2 = std::abs(b_jy_lz - con.j.x);
        rep.res_j_lz = std::max(rep.res_j_lz, std::max(r1, r2) / jn);

        const double b_jx_jy = poisson_bracket(p, jx, jy, s, opt);
        const double expect = 4.0 * rc2 * con.l_z - p.q;
        rep.res_central =
            std::max(rep.res_central,
                     std::abs(b_jx_jy - expect) / (1.0 + std::abs(expect)));

        const double b_jx_h = poisson_bracket(p, jx, hh, s, opt);
        const double b_jy_h = poisson_bracket(p, jy, hh, s, opt);
        const Vec2 ezr = s.pos().perp();
        sign_acc += b_jx_h * (4.0 * con.energy * ezr.x) +
                    b_jy_h * (4.0 * con.energy * ezr.y);
    }
    rep.jh_sign = sign_acc >= 0.0 ? +1 : -1;
    for (const auto& s : pts) {
        const auto con = constants_of_motion(p, s);
        const Vec2 ezr = s.pos().perp();
        const double b_jx_h = poisson_bracket(p, jx, hh, s, opt);
        const double b_jy_h = poisson_bracket(p, jy, hh, s, opt);
        const double scale = 1.0 + 4.0 * std::abs(con.energy) * ezr.norm();
        const double r1 =
            std::abs(b_jx_h - rep.jh_sign * 4.0 * con.energy * ezr.x);
        const double r2 =
            std::abs(b_jy_h - rep.jh_sign * 4.0 * con.energy * ezr.y);
        rep.res_j_h = std::max(rep.res_j_h, std::max(r1, r2) / scale);
    }
    return rep;
}

}  // namespace morbit
