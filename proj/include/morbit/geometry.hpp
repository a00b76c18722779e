#pragma once

// Orbit geometry from conserved quantities and from trajectory fits.
// For an E = 0 orbit the conserved set gives
//   center = J/(2 L_z),  R = sqrt(alpha/2)/|L_z|,
//   R^2 = Rcal^2 + |J|^2/(4 L_z^2) - Q/(2 L_z),
//   l^2 = R^2 - Rcal^2 + Q/(2 L_z),
//   T = pi alpha/|L_z|^3 + pi Q/(2 L_z^2).

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "morbit/dynamics.hpp"
#include "morbit/invariants.hpp"
#include "morbit/model.hpp"

namespace morbit {

class NotZeroEnergy : public Error {
  public:
    explicit NotZeroEnergy(double h)
        : Error("geometry: state is not on the E = 0 stratum (H = " +
                std::to_string(h) + ")") {}
};

class ZeroAngularMomentum : public Error {
  public:
    ZeroAngularMomentum() : Error("geometry: |L_z| below threshold") {}
};

class InconsistentGeometry : public Error {
  public:
    explicit InconsistentGeometry(double rel)
        : Error("geometry: the two R^2 expressions disagree (rel = " +
                std::to_string(rel) + ")") {}
};

class DegenerateFit : public Error {
  public:
    explicit DegenerateFit(const std::string& why)
        : Error("geometry: degenerate fit: " + why) {}
};

class ForbiddenRegion : public Error {
  public:
    ForbiddenRegion() : Error("geometry: E < V(a), radius not reachable") {}
};

class NoCircularOrbit : public Error {
  public:
    NoCircularOrbit() : Error("geometry: no real orbital frequency at this radius") {}
};

struct OrbitGeometry {
    Vec2 center{};
    double radius_r = 0.0;
    double offset_l = 0.0;
    double l_z = 0.0;
    Vec2 j{};
    double period_pred = 0.0;
    double fit_residual = 0.0;
};

struct GeometryOptions {
    double e0_rel_tol = 1e-8;    ///< |H| tolerance relative to alpha/Rcal^4
    double lz_threshold = 1e-10;
    double consistency_tol = 1e-9;
};

/// E = 0 period pi alpha/|L_z|^3 + pi Q/(2 L_z^2) on the L_z > 0 branch,
/// written in the reflection-covariant form pi (alpha + Q L_z/2)/|L_z|^3
/// (the reflection y -> -y maps (Q, L_z) -> (-Q, -L_z) at equal period).
inline double period_formula(const ModelParams& p, double l_z) {
    return M_PI * (p.alpha + 0.5 * p.q * l_z) /
           std::pow(std::abs(l_z), 3);
}

/// Orbit descriptors from the conserved set of an E = 0 state.
inline OrbitGeometry predict_geometry(const ModelParams& p, const PhaseState& s,
                                      GeometryOptions opt = {}) {
    const auto con = constants_of_motion(p, s);
    if (std::abs(con.energy) > opt.e0_rel_tol * p.energy_scale())
        throw NotZeroEnergy(con.energy);
    if (std::abs(con.l_z) < opt.lz_threshold) throw ZeroAngularMomentum();

    OrbitGeometry geo;
    geo.l_z = con.l_z;
    geo.j = con.j;
    geo.center = con.j / (2.0 * con.l_z);
    geo.radius_r = std::sqrt(0.5 * p.alpha) / std::abs(con.l_z);
    const double rc2 = p.r_cal * p.r_cal;
    const double r2_casimir = rc2 + con.j.norm2() / (4.0 * con.l_z * con.l_z) -
                              p.q / (2.0 * con.l_z);
    const double rel = std::abs(r2_casimir - geo.radius_r * geo.radius_r) /
                       (geo.radius_r * geo.radius_r);
    if (rel > opt.consistency_tol) throw InconsistentGeometry(rel);
    geo.offset_l = con.j.norm() / (2.0 * std::abs(con.l_z));
    geo.period_pred = period_formula(p, con.l_z);
    geo.fit_residual = 0.0;
    return geo;
}

namespace detail {

struct CircleFit {
    Vec2 center{};
    double r = 0.0;
    double rms = 0.0;
};

/// Kasa algebraic fit: least squares on 2ax + 2by + c = x^2 + y^2.
inline CircleFit kasa_fit(const std::vector<Vec2>& pts) {
    const size_t n = pts.size();
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (const auto& q : pts) {
        const Eigen::Vector3d row(2.0 * q.x, 2.0 * q.y, 1.0);
        A += row * row.transpose();
        rhs += row * (q.x * q.x + q.y * q.y);
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
    if (!lu.isInvertible()) throw DegenerateFit("collinear samples");
    const Eigen::Vector3d sol = lu.solve(rhs);
    CircleFit f;
    f.center = {sol[0], sol[1]};
    f.r = std::sqrt(std::max(0.0, sol[2] + sol[0] * sol[0] + sol[1] * sol[1]));
    double ss = 0.0;
    for (const auto& q : pts) {
        const double d = (q - f.center).norm() - f.r;
        ss += d * d;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

/// Gauss-Newton geometric refinement of (cx, cy, R).
inline CircleFit geometric_circle_fit(const std::vector<Vec2>& pts,
                                      CircleFit f) {
    const size_t n = pts.size();
    for (int it = 0; it < 40; ++it) {
        Eigen::Matrix3d JtJ = Eigen::Matrix3d::Zero();
        Eigen::Vector3d Jtr = Eigen::Vector3d::Zero();
        for (const auto& q : pts) {
            const Vec2 d = q - f.center;
            const double dist = d.norm();
            if (dist < 1e-300) continue;
            const double res = dist - f.r;
            const Eigen::Vector3d Jrow(-d.x / dist, -d.y / dist, -1.0);
            JtJ += Jrow * Jrow.transpose();
            Jtr += Jrow * res;
        }
        const Eigen::Vector3d step = JtJ.ldlt().solve(-Jtr);
        f.center.x += step[0];
        f.center.y += step[1];
        f.r += step[2];
        if (step.norm() < 1e-15 * (1.0 + f.r)) break;
    }
    double ss = 0.0;
    for (const auto& q : pts) {
        const double d = (q - f.center).norm() - f.r;
        ss += d * d;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

/// Angular coverage about the center (radians of covered arc).
inline double arc_coverage(const std::vector<Vec2>& pts, const Vec2& c) {
    std::vector<double> ang;
    ang.reserve(pts.size());
    for (const auto& q : pts) ang.push_back(std::atan2(q.y - c.y, q.x - c.x));
    std::sort(ang.begin(), ang.end());
    double gap = 2.0 * M_PI - (ang.back() - ang.front());
    for (size_t i = 1; i < ang.size(); ++i)
        gap = std::max(gap, ang[i] - ang[i - 1]);
    return 2.0 * M_PI - gap;
}

}  // namespace detail

/// Circle fit of a trajectory (Kasa start, geometric least-squares polish).
/// Constants are taken from the first sample.
inline OrbitGeometry fit_circle(const Trajectory& traj) {
    if (traj.samples.size() < 8) throw DegenerateFit("too few samples");
    std::vector<Vec2> pts;
    pts.reserve(traj.samples.size());
    for (const auto& s : traj.samples) pts.push_back(s.pos());

    auto f = detail::kasa_fit(pts);
    f = detail::geometric_circle_fit(pts, f);
    if (detail::arc_coverage(pts, f.center) < M_PI / 3.0)
        throw DegenerateFit("arc span below 60 degrees");

    const auto con = constants_of_motion(traj.params, traj.samples.front());
    OrbitGeometry geo;
    geo.center = f.center;
    geo.radius_r = f.r;
    geo.offset_l = f.center.norm();
    geo.l_z = con.l_z;
    geo.j = con.j;
    geo.period_pred = period_formula(traj.params, con.l_z);
    geo.fit_residual = f.rms;
    return geo;
}

struct ConstraintResiduals {
    double max_radial = 0.0;  ///< J.r/L - (r^2 - Rcal^2 + Q/(2L))
    double rms_radial = 0.0;
    double max_cross = 0.0;   ///< J x r/L + (r^2 + Rcal^2)(r.P)/L
    double rms_cross = 0.0;
};

/// Orbit-constraint residuals along a trajectory, with J and L_z frozen at
/// the first sample (they are identities with instantaneous constants).
inline ConstraintResiduals constraint_residuals(const ModelParams& p,
                                                const Trajectory& traj,
                                                GeometryOptions opt = {}) {
    if (traj.samples.empty()) throw DegenerateFit("empty trajectory");
    const auto con0 = constants_of_motion(p, traj.samples.front());
    if (std::abs(con0.energy) > opt.e0_rel_tol * p.energy_scale())
        throw NotZeroEnergy(con0.energy);
    if (std::abs(con0.l_z) < opt.lz_threshold) throw ZeroAngularMomentum();

    const double rc2 = p.r_cal * p.r_cal;
    ConstraintResiduals out;
    double ss1 = 0.0, ss2 = 0.0;
    for (const auto& s : traj.samples) {
        const Vec2 r = s.pos();
        const double r2 = r.norm2();
        const double c1 = con0.j.dot(r) / con0.l_z -
                          (r2 - rc2 + p.q / (2.0 * con0.l_z));
        const double c2 = con0.j.cross(r) / con0.l_z +
                          (r2 + rc2) * r.dot(s.mom()) / con0.l_z;
        out.max_radial = std::max(out.max_radial, std::abs(c1));
        out.max_cross = std::max(out.max_cross, std::abs(c2));
        ss1 += c1 * c1;
        ss2 += c2 * c2;
    }
    out.rms_radial = std::sqrt(ss1 / traj.samples.size());
    out.rms_cross = std::sqrt(ss2 / traj.samples.size());
    return out;
}

struct StabilityProbe {
    double a = 0.0;
    double v_a = 0.0;
    double det_m = 0.0;
};

/// det(M) = a V'(a) + 2 V(a) - 2E (= a V' - v_a^2), the obstruction to
/// trading (dE, dL_z) for (da, dv_a) on the outermost excursion.
inline StabilityProbe stability_determinant(const ModelParams& p, double a,
                                            double energy) {
    if (!(a > 0.0)) throw DomainError("stability_determinant: a must be > 0");
    const double v2 = 2.0 * (energy - potential(p, a * a));
    if (v2 < 0.0) throw ForbiddenRegion();
    const double vp = a * dpotential_over_r(p, a * a);  // V'(a)
    return StabilityProbe{a, std::sqrt(v2),
                          a * vp + 2.0 * potential(p, a * a) - 2.0 * energy};
}

/// det(M) = omega Q a^2/(a^2+Rcal^2)^2 for a circle centered on the origin,
/// with omega solving omega^2 a = V'(a) + B(a) omega a. `branch` picks the
/// root continuous in Q from omega = +sqrt(V'/a) (+1) or its negative (-1).
inline double centered_orbit_determinant(const ModelParams& p, double a,
                                         int branch = +1) {
    if (!(a > 0.0))
        throw DomainError("centered_orbit_determinant: a must be > 0");
    const double b = magnetic_field(p, a * a);
    const double vp_over_a = dpotential_over_r(p, a * a);  // V'(a)/a
    const double disc = b * b + 4.0 * vp_over_a;
    if (disc < 0.0) throw NoCircularOrbit();
    const double omega = 0.5 * (b + (branch >= 0 ? 1.0 : -1.0) * std::sqrt(disc));
    const double u = a * a + p.r_cal * p.r_cal;
    return omega * p.q * a * a / (u * u);
}

// ---------------------------------------------------------------------------
// Ellipse fitting (direct conic least squares, Halir-Flusser form, plus a
// geometric Gauss-Newton polish) for hodograph analysis.
// ---------------------------------------------------------------------------

struct EllipseFit {
    Vec2 center{};
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double eccentricity = 0.0;
    std::optional<double> axis_angle;  ///< major-axis angle; empty if circular
    double residual = 0.0;
};

namespace detail {

struct EllipseParams {
    double cx, cy, a, b, phi;
};

inline Vec2 ellipse_point(const EllipseParams& e, double th) {
    const double c = std::cos(e.phi), s = std::sin(e.phi);
    const double ex = e.a * std::cos(th), ey = e.b * std::sin(th);
    return {e.cx + c * ex - s * ey, e.cy + s * ex + c * ey};
}

/// Closest-point parameter on the ellipse for q (Newton on the angle).
inline double project_angle(const EllipseParams& e, const Vec2& q) {
    const double c = std::cos(e.phi), s = std::sin(e.phi);
    const double lx = c * (q.x - e.cx) + s * (q.y - e.cy);
    const double ly = -s * (q.x - e.cx) + c * (q.y - e.cy);
    double th = std::atan2(e.a * ly, e.b * lx);
    for (int it = 0; it < 30; ++it) {
        const double ct = std::cos(th), st = std::sin(th);
        // f = d/dth |p(th) - q|^2 / 2 and its derivative
        const double f =
            (e.a * ct - lx) * (-e.a * st) + (e.b * st - ly) * (e.b * ct);
        const double fp = (e.a * e.a - e.b * e.b) * (st * st - ct * ct) +
                          e.a * lx * ct + e.b * ly * st;
        if (std::abs(fp) < 1e-300) break;
        const double dth = f / fp;
        th -= dth;
        if (std::abs(dth) < 1e-14) break;
    }
    return th;
}

/// Direct conic fit constrained to ellipses (Halir & Flusser's stable split).
inline std::array<double, 6> conic_fit(const std::vector<Vec2>& pts) {
    const size_t n = pts.size();
    if (n < 6) throw DegenerateFit("too few samples for a conic");
    Eigen::MatrixXd D1(n, 3), D2(n, 3);
    for (size_t i = 0; i < n; ++i) {
        const double x = pts[i].x, y = pts[i].y;
        D1(i, 0) = x * x;
        D1(i, 1) = x * y;
        D1(i, 2) = y * y;
        D2(i, 0) = x;
        D2(i, 1) = y;
        D2(i, 2) = 1.0;
    }
    const Eigen::Matrix3d S1 = D1.transpose() * D1;
    const Eigen::Matrix3d S2 = D1.transpose() * D2;
    const Eigen::Matrix3d S3 = D2.transpose() * D2;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(S3);
    if (!lu.isInvertible()) throw DegenerateFit("degenerate conic scatter");
    const Eigen::Matrix3d T = -lu.solve(S2.transpose());
    const Eigen::Matrix3d M0 = S1 + S2 * T;
    Eigen::Matrix3d M;
    M.row(0) = M0.row(2) / 2.0;
    M.row(1) = -M0.row(1);
    M.row(2) = M0.row(0) / 2.0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(M);
    int best = -1;
    for (int k = 0; k < 3; ++k) {
        if (std::abs(es.eigenvalues()[k].imag()) > 0.0) continue;
        const Eigen::Vector3d v = es.eigenvectors().col(k).real();
        const double cond = 4.0 * v[0] * v[2] - v[1] * v[1];
        if (cond > 0.0) best = k;
    }
    if (best < 0) throw DegenerateFit("no ellipse solution of the conic fit");
    const Eigen::Vector3d a1 = es.eigenvectors().col(best).real();
    const Eigen::Vector3d a2 = T * a1;
    return {a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]};
}

inline EllipseParams conic_to_geometric(const std::array<double, 6>& c) {
    const double A = c[0], B = c[1], C = c[2], D = c[3], E = c[4], F = c[5];
    Eigen::Matrix2d M2;
    M2 << A, B / 2.0, B / 2.0, C;
    const Eigen::Vector2d cen = M2.fullPivLu().solve(Eigen::Vector2d(-D / 2.0, -E / 2.0));
    const double F0 = F + 0.5 * (D * cen[0] + E * cen[1]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M2);
    const Eigen::Vector2d lam = es.eigenvalues();
    const double s0 = -F0 / lam[0], s1 = -F0 / lam[1];
    if (!(s0 > 0.0 && s1 > 0.0)) throw DegenerateFit("conic is not an ellipse");
    EllipseParams ep;
    ep.cx = cen[0];
    ep.cy = cen[1];
    const double r0 = std::sqrt(s0), r1 = std::sqrt(s1);
    if (r0 >= r1) {
        ep.a = r0;
        ep.b = r1;
        ep.phi = std::atan2(es.eigenvectors().col(0)[1], es.eigenvectors().col(0)[0]);
    } else {
        ep.a = r1;
        ep.b = r0;
        ep.phi = std::atan2(es.eigenvectors().col(1)[1], es.eigenvectors().col(1)[0]);
    }
    return ep;
}

inline double ellipse_rms(const EllipseParams& e, const std::vector<Vec2>& pts) {
    double ss = 0.0;
    for (const auto& q : pts) {
        const double th = project_angle(e, q);
        ss += (ellipse_point(e, th) - q).norm2();
    }
    return std::sqrt(ss / pts.size());
}

/// Gauss-Newton on (cx, cy, a, b, phi) against true point-to-ellipse
/// distances.
inline EllipseParams geometric_ellipse_fit(EllipseParams e,
                                           const std::vector<Vec2>& pts) {
    for (int it = 0; it < 25; ++it) {
        Eigen::Matrix<double, 5, 5> JtJ = Eigen::Matrix<double, 5, 5>::Zero();
        Eigen::Matrix<double, 5, 1> Jtr = Eigen::Matrix<double, 5, 1>::Zero();
        for (const auto& q : pts) {
            const double th = project_angle(e, q);
            const Vec2 pt = ellipse_point(e, th);
            const Vec2 d = pt - q;
            const double dist = d.norm();
            if (dist < 1e-14) continue;
            const Vec2 nrm = d / dist;
            const double c = std::cos(e.phi), s = std::sin(e.phi);
            const double ct = std::cos(th), st = std::sin(th);
            // d(point)/d(params) projected on the outward normal
            Eigen::Matrix<double, 5, 1> Jrow;
            Jrow[0] = nrm.x;
            Jrow[1] = nrm.y;
            Jrow[2] = nrm.x * c * ct + nrm.y * s * ct;
            Jrow[3] = -nrm.x * s * st + nrm.y * c * st;
            const double dpx = -s * (e.a * ct) - c * (e.b * st);
            const double dpy = c * (e.a * ct) - s * (e.b * st);
            Jrow[4] = nrm.x * dpx + nrm.y * dpy;
            JtJ += Jrow * Jrow.transpose();
            Jtr += Jrow * dist;
        }
        JtJ.diagonal().array() += 1e-12;
        const Eigen::Matrix<double, 5, 1> step = JtJ.ldlt().solve(-Jtr);
        e.cx += step[0];
        e.cy += step[1];
        e.a += step[2];
        e.b += step[3];
        e.phi += step[4];
        if (e.a < e.b) {
            std::swap(e.a, e.b);
            e.phi += M_PI / 2.0;
        }
        if (step.norm() < 1e-14 * (1.0 + e.a)) break;
    }
    return e;
}

}  // namespace detail

/// Fit an ellipse to a planar point set. Near-circular data (ecc < 1e-6) is
/// reported with eccentricity 0 and no axis angle.
inline EllipseFit fit_ellipse(const std::vector<Vec2>& pts) {
    auto ep = detail::conic_to_geometric(detail::conic_fit(pts));
    ep = detail::geometric_ellipse_fit(ep, pts);
    EllipseFit out;
    out.center = {ep.cx, ep.cy};
    out.semi_major = ep.a;
    out.semi_minor = ep.b;
    out.residual = detail::ellipse_rms(ep, pts);
    const double ratio = ep.b / ep.a;
    out.eccentricity = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
    // circularity floor: an axis difference below the residual noise level
    // is not a measurable eccentricity (ecc ~ sqrt(2 d(a-b)/a))
    const double ecc_floor =
        std::max(1e-6, std::sqrt(6.0 * out.residual / ep.a));
    if (out.eccentricity < ecc_floor) {
        out.eccentricity = 0.0;
        out.axis_angle = std::nullopt;
    } else {
        double phi = std::fmod(ep.phi, M_PI);
        if (phi < 0.0) phi += M_PI;
        out.axis_angle = phi;
    }
    return out;
}

/// Predicted hodograph eccentricity 2 R l/(R^2 + Rcal^2 + l^2).
inline double hodograph_eccentricity(const ModelParams& p,
                                     const OrbitGeometry& geo) {
    const double R = geo.radius_r, l = geo.offset_l;
    return 2.0 * R * l / (R * R + p.r_cal * p.r_cal + l * l);
}

/// Ellipse fit of the velocity curve of one E = 0 period.
inline EllipseFit hodograph_analysis(const Trajectory& traj,
                                     const OrbitGeometry& geo) {
    (void)geo;
    std::vector<Vec2> vel;
    vel.reserve(traj.samples.size());
    for (const auto& s : traj.samples) vel.push_back(s.mom());
    return fit_ellipse(vel);
}

/// Angle between the hodograph major axis and the normal to the orbit axis
/// (0 when the two are exactly perpendicular). Requires l > 0.
inline double hodograph_axis_misalignment(const EllipseFit& ell,
                                          const OrbitGeometry& geo) {
    if (!ell.axis_angle)
        throw DegenerateFit("circular hodograph has no axis");
    if (geo.offset_l <= 0.0)
        throw DegenerateFit("centered orbit has no axis");
    const double orbit_axis = std::atan2(geo.center.y, geo.center.x);
    double d = *ell.axis_angle - (orbit_axis + M_PI / 2.0);
    while (d > M_PI / 2.0) d -= M_PI;
    while (d < -M_PI / 2.0) d += M_PI;
    return std::abs(d);
}

}  // namespace morbit
