#pragma once

// Plane <-> sphere stereographic maps and the monopole identification. The
// south pole touches the plane's origin (r = 0 -> (0,0,-Rcal)), the equator
// is the circle r = Rcal, and the plane's infinity is the north pole. The
// conformal factor is g_plane = ((r^2+Rcal^2)/(2 Rcal^2))^2 g_sphere.

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "morbit/dynamics.hpp"
#include "morbit/model.hpp"

namespace morbit {

class PoleSingular : public Error {
  public:
    PoleSingular() : Error("stereo: unprojection singular at the north pole") {}
};

class NotPlanar : public Error {
  public:
    explicit NotPlanar(double resid)
        : Error("stereo: projected orbit not planar (rms = " +
                std::to_string(resid) + ")") {}
};

struct SpherePoint {
    double x3 = 0.0, y3 = 0.0, z3 = 0.0;
};

inline SpherePoint north_pole(const ModelParams& p) {
    return {0.0, 0.0, p.r_cal};
}

inline SpherePoint project(const ModelParams& p, double x, double y) {
    if (!(std::isfinite(x) && std::isfinite(y)))
        throw DomainError("project: non-finite input");
    const double r2 = x * x + y * y;
    const double rc2 = p.r_cal * p.r_cal;
    const double u = r2 + rc2;
    return {2.0 * rc2 * x / u, 2.0 * rc2 * y / u, p.r_cal * (r2 - rc2) / u};
}

inline Vec2 unproject(const ModelParams& p, const SpherePoint& q) {
    const double rc = p.r_cal;
    const double norm2 = q.x3 * q.x3 + q.y3 * q.y3 + q.z3 * q.z3;
    if (std::abs(norm2 - rc * rc) > 1e-6 * rc * rc)
        throw DomainError("unproject: point is not on the sphere");
    const double dpole = std::sqrt((q.x3 * q.x3) + (q.y3 * q.y3) +
                                   (q.z3 - rc) * (q.z3 - rc));
    if (dpole < 1e-9 * rc) throw PoleSingular();
    const double f = rc / (rc - q.z3);
    return {q.x3 * f, q.y3 * f};
}

/// Measured metric ratio (plane distance / sphere distance)^2 at (x, y) by
/// finite differences; equals ((r^2+Rcal^2)/(2 Rcal^2))^2 for the exact map.
inline double metric_ratio(const ModelParams& p, double x, double y,
                           double dirx, double diry, double h = 1e-6) {
    const double n = std::hypot(dirx, diry);
    const double ex = dirx / n, ey = diry / n;
    const SpherePoint a = project(p, x - h * ex, y - h * ey);
    const SpherePoint b = project(p, x + h * ex, y + h * ey);
    const double ds2 = (b.x3 - a.x3) * (b.x3 - a.x3) +
                       (b.y3 - a.y3) * (b.y3 - a.y3) +
                       (b.z3 - a.z3) * (b.z3 - a.z3);
    return (2.0 * h) * (2.0 * h) / ds2;
}

struct MonopoleData {
    double b_sphere;    ///< constant field on the sphere, -Q/(4 Rcal^4)
    double total_flux;  ///< 2 pi M = -pi Q/Rcal^2
    double m_charge;    ///< M = -Q/(2 Rcal^2)
};

inline MonopoleData monopole_data(const ModelParams& p) {
    const double rc2 = p.r_cal * p.r_cal;
    return {-p.q / (4.0 * rc2 * rc2), -M_PI * p.q / rc2, -p.q / (2.0 * rc2)};
}

/// Flux of B through the disc r <= r_max (composite Simpson after the
/// substitution r = Rcal tan u, which maps the integrand to a bounded one).
inline double plane_flux_integral(const ModelParams& p, double r_max, int n) {
    if (!(r_max > 0.0)) throw DomainError("plane_flux_integral: r_max > 0");
    if (n < 16) throw DomainError("plane_flux_integral: n >= 16");
    if (n % 2 == 1) ++n;
    const double umax = std::atan(r_max / p.r_cal);
    const double h = umax / n;
    auto f = [&](double u) {
        const double r = p.r_cal * std::tan(u);
        const double jac = p.r_cal / (std::cos(u) * std::cos(u));
        return magnetic_field(p, r * r) * 2.0 * M_PI * r * jac;
    };
    double sum = f(0.0) + f(umax);
    for (int i = 1; i < n; ++i) sum += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

struct SphereCircle {
    double planarity_residual = 0.0;       ///< rms distance to the best plane
    double gamma = 0.0;                    ///< cone half-angle, in (0, pi)
    std::optional<double> omega_pred;      ///< |Q|/(4 Rcal^4 cos gamma)
    std::array<double, 3> axis{0, 0, 0};   ///< cap axis (south-pole side cap)
};

/// Project an E = 0 trajectory to the sphere, fit the best plane by total
/// least squares, and report the cone half-angle. gamma < pi/2 means the
/// image encircles the cap containing the south pole.
inline SphereCircle sphere_circle_analysis(const ModelParams& p,
                                           const Trajectory& traj) {
    if (traj.samples.size() < 8)
        throw DomainError("sphere_circle_analysis: too few samples");
    const size_t n = traj.samples.size();
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(n);
    for (const auto& s : traj.samples) {
        const SpherePoint q = project(p, s.x, s.y);
        pts.emplace_back(q.x3, q.y3, q.z3);
        mean += pts.back();
    }
    mean /= static_cast<double>(n);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& q : pts) cov += (q - mean) * (q - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    Eigen::Vector3d nrm = es.eigenvectors().col(0);  // smallest eigenvalue

    double ss = 0.0;
    for (const auto& q : pts) {
        const double d = nrm.dot(q - mean);
        ss += d * d;
    }
    SphereCircle out;
    out.planarity_residual = std::sqrt(ss / n);
    if (out.planarity_residual > 1e-4 * p.r_cal)
        throw NotPlanar(out.planarity_residual);

    const double hplane = nrm.dot(mean);  // signed plane offset along nrm
    // south pole (0,0,-Rcal) lies in the cap around +nrm iff nrm.s > h
    double cosg;
    if (-p.r_cal * nrm[2] > hplane) {
        cosg = hplane / p.r_cal;
    } else {
        nrm = -nrm;
        cosg = -hplane / p.r_cal;
    }
    cosg = std::clamp(cosg, -1.0, 1.0);
    out.gamma = std::acos(cosg);
    out.axis = {nrm[0], nrm[1], nrm[2]};
    if (std::abs(cosg) > 1e-9)
        out.omega_pred = std::abs(p.q) / (4.0 * std::pow(p.r_cal, 4) * cosg);
    return out;
}

}  // namespace morbit
