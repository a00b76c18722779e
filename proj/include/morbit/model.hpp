#pragma once

// Parameter family and closed-form field/potential profiles of the magnetized
// off-center circular-orbit system:
//   V(r) = -alpha/(r^2 + Rcal^2)^2,  B(r) = -Q/(r^2 + Rcal^2)^2,
//   G(r) = 2\int B r dr = Q/(r^2 + Rcal^2)  (constant fixed by G(inf) = 0).
// Mass is 1 throughout.

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace morbit {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    // scalar z-component of the 2-d cross product
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
    // e_z x v
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public Error {
  public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// Physical constants (alpha, Rcal, Q) selecting one member of the family.
struct ModelParams {
    double alpha;  ///< coupling, energy * length^4, > 0
    double r_cal;  ///< length scale Rcal, > 0
    double q;      ///< monopole strength Q (signed)

    ModelParams(double alpha_, double r_cal_, double q_)
        : alpha(alpha_), r_cal(r_cal_), q(q_) {
        if (!(std::isfinite(alpha) && alpha > 0.0))
            throw DomainError("ModelParams: alpha must be finite and > 0");
        if (!(std::isfinite(r_cal) && r_cal > 0.0))
            throw DomainError("ModelParams: r_cal must be finite and > 0");
        if (!std::isfinite(q))
            throw DomainError("ModelParams: q must be finite");
    }

    double energy_scale() const { return alpha / std::pow(r_cal, 4); }
};

/// Planar position and kinetic momentum (mass 1, so P equals velocity).
struct PhaseState {
    double x = 0.0;
    double y = 0.0;
    double px = 0.0;
    double py = 0.0;
    double t = 0.0;

    Vec2 pos() const { return {x, y}; }
    Vec2 mom() const { return {px, py}; }
    double r2() const { return x * x + y * y; }
    double r() const { return std::sqrt(r2()); }

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(px) &&
               std::isfinite(py) && std::isfinite(t);
    }
};

inline void require_finite(const PhaseState& s, const char* where) {
    if (!s.finite())
        throw DomainError(std::string(where) + ": non-finite phase state");
}

/// Field and potential values at one radius.
struct FieldProfile {
    double v;      ///< V(r)
    double dv_dr;  ///< V'(r)
    double b;      ///< B(r)
    double g;      ///< G(r), with G(inf) = 0
};

namespace detail {
inline double u_of_r2(const ModelParams& p, double r2) {
    return r2 + p.r_cal * p.r_cal;
}
}  // namespace detail

inline double potential(const ModelParams& p, double r2) {
    const double u = detail::u_of_r2(p, r2);
    return -p.alpha / (u * u);
}

/// V'(r)/r = 4 alpha/(r^2+Rcal^2)^3; finite at r = 0, so the gradient
/// (V'/r) * (x, y) needs no special casing.
inline double dpotential_over_r(const ModelParams& p, double r2) {
    const double u = detail::u_of_r2(p, r2);
    return 4.0 * p.alpha / (u * u * u);
}

inline double magnetic_field(const ModelParams& p, double r2) {
    const double u = detail::u_of_r2(p, r2);
    return -p.q / (u * u);
}

inline double gauge_scalar(const ModelParams& p, double r2) {
    return p.q / detail::u_of_r2(p, r2);
}

inline FieldProfile field_profile(const ModelParams& p, double r) {
    if (!(std::isfinite(r) && r >= 0.0))
        throw DomainError("field_profile: r must be finite and >= 0");
    const double r2 = r * r;
    return FieldProfile{potential(p, r2), r * dpotential_over_r(p, r2),
                        magnetic_field(p, r2), gauge_scalar(p, r2)};
}

inline double hamiltonian(const ModelParams& p, const PhaseState& s) {
    require_finite(s, "hamiltonian");
    return 0.5 * (s.px * s.px + s.py * s.py) + potential(p, s.r2());
}

/// E=0 speed: |P| = sqrt(2 alpha)/(r^2 + Rcal^2).
inline double e0_speed(const ModelParams& p, double r2) {
    return std::sqrt(2.0 * p.alpha) / detail::u_of_r2(p, r2);
}

/// State on the H = 0 stratum at (x, y) moving along `heading` (radians).
inline PhaseState make_e0_state(const ModelParams& p, double x, double y,
                                double heading) {
    if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(heading)))
        throw DomainError("make_e0_state: non-finite input");
    const double s = e0_speed(p, x * x + y * y);
    return PhaseState{x, y, s * std::cos(heading), s * std::sin(heading), 0.0};
}

/// (l_z - G(r)/2)^2/(2 r^2) + V(r) with mechanical angular momentum
/// K = L_z - G/2. At r = 0 the centrifugal term is finite only when
/// K(0) = l_z - Q/(2 Rcal^2) vanishes, in which case the limit is V(0).
inline double effective_potential(const ModelParams& p, double l_z, double r) {
    if (!(std::isfinite(r) && r >= 0.0) || !std::isfinite(l_z))
        throw DomainError("effective_potential: bad input");
    const double r2 = r * r;
    const double k = l_z - 0.5 * gauge_scalar(p, r2);
    if (r == 0.0) {
        if (k != 0.0)
            throw DomainError(
                "effective_potential: centrifugal divergence at r = 0");
        return potential(p, 0.0);
    }
    return 0.5 * k * k / r2 + potential(p, r2);
}

namespace detail {

// golden-section refinement of one bracketed local minimum (log-r units)
inline double refine_min(const ModelParams& p, double l_z, double a, double b) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = effective_potential(p, l_z, std::exp(c));
    double fd = effective_potential(p, l_z, std::exp(d));
    for (int it = 0; it < 200 && (b - a) > 1e-14; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a);
            fc = effective_potential(p, l_z, std::exp(c));
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a);
            fd = effective_potential(p, l_z, std::exp(d));
        }
    }
    return std::min(fc, fd);
}

// min over r of the effective potential at fixed L. The scan window tracks
// the expected well radius sqrt(alpha/2)/L; every interior local minimum is
// refined (the monotone tail toward r -> infinity is not a well).
inline double min_effective_potential(const ModelParams& p, double l_z) {
    const double r_est = std::sqrt(0.5 * p.alpha) / std::max(l_z, 1e-300);
    const double lo =
        std::log(1e-3 * std::min(p.r_cal, r_est));
    const double hi = std::log(1e3 * std::max(p.r_cal, r_est));
    const int n = 2000;
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i)
        v[i] = effective_potential(p, l_z, std::exp(lo + (hi - lo) * i / n));
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i < n; ++i) {
        best = std::min(best, v[i]);
        if (v[i] <= v[i - 1] && v[i] <= v[i + 1]) {
            const double a = lo + (hi - lo) * (i - 1) / n;
            const double b = lo + (hi - lo) * (i + 1) / n;
            best = std::min(best, refine_min(p, l_z, a, b));
        }
    }
    return best;
}

}  // namespace detail

/// Largest angular momentum carried by a bound E = 0 orbit. Closed form
/// sqrt(alpha/(2 Rcal^2)) at Q = 0; otherwise located numerically as the L
/// at which the effective-potential well just touches zero.
inline double bound_angular_momentum_limit(const ModelParams& p) {
    if (p.q == 0.0)
        return std::sqrt(p.alpha / (2.0 * p.r_cal * p.r_cal));
    double lo = 1e-9 * std::sqrt(p.alpha) / p.r_cal;
    double hi = lo;
    while (detail::min_effective_potential(p, hi) < 0.0) hi *= 2.0;
    // bisect: min V_eff is negative below L_max, positive above
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (detail::min_effective_potential(p, mid) < 0.0) lo = mid;
        else hi = mid;
        if ((hi - lo) < 1e-12 * hi) break;
    }
    return 0.5 * (lo + hi);
}

/// Absorb the Cisneros-type term -Q^2/[8 Rcal^2 (r^2+Rcal^2)^2] into alpha:
/// the shifted problem is the same family with alpha' = alpha + Q^2/(8 Rcal^2).
inline ModelParams equivalent_params_under_q2_shift(const ModelParams& p) {
    return ModelParams(p.alpha + p.q * p.q / (8.0 * p.r_cal * p.r_cal),
                       p.r_cal, p.q);
}

}  // namespace morbit
