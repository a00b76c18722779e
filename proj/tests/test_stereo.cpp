#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "morbit/geometry.hpp"
#include "morbit/stereo.hpp"

using namespace morbit;

namespace {
const ModelParams kBase(2.0, 1.0, 0.0);
const ModelParams kMono(2.0, 1.0, 2.0);

PhaseState orbit_state(const ModelParams& p, double l_z) {
    // E-zero orbit with the requested L_z, placed at the apoapsis
    const double R = std::sqrt(0.5 * p.alpha) / std::abs(l_z);
    const double l2 = 0.5 * p.alpha / (l_z * l_z) - p.r_cal * p.r_cal +
                      p.q / (2.0 * l_z);
    REQUIRE(l2 >= 0.0);
    const double l = std::sqrt(l2);
    return make_e0_state(p, l + R, 0.0, l_z > 0 ? M_PI / 2.0 : -M_PI / 2.0);
}
}  // namespace

TEST_CASE("projection landmarks") {
    const auto south = project(kBase, 0.0, 0.0);
    CHECK(south.x3 == 0.0);
    CHECK(south.y3 == 0.0);
    CHECK(south.z3 == Catch::Approx(-1.0).margin(1e-15));

    const auto eq = project(kBase, 1.0, 0.0);
    CHECK(eq.z3 == Catch::Approx(0.0).margin(1e-15));
    CHECK(eq.x3 == Catch::Approx(1.0).margin(1e-15));

    const auto np = north_pole(kBase);
    CHECK(np.z3 == 1.0);
}

TEST_CASE("projected points satisfy the sphere constraint") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const auto q = project(kMono, u(rng), u(rng));
        const double n2 = q.x3 * q.x3 + q.y3 * q.y3 + q.z3 * q.z3;
        CHECK(std::abs(n2 - 1.0) <= 1e-12);
    }
}

TEST_CASE("unproject inverts project away from the pole") {
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng), y = u(rng);
        const auto back = unproject(kMono, project(kMono, x, y));
        CHECK(std::abs(back.x - x) <= 1e-12 * std::max(1.0, std::abs(x)));
        CHECK(std::abs(back.y - y) <= 1e-12 * std::max(1.0, std::abs(y)));
    }
    const auto eq = unproject(kBase, SpherePoint{1.0, 0.0, 0.0});
    CHECK(eq.norm() == Catch::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(unproject(kBase, SpherePoint{0.0, 0.0, 1.0}), PoleSingular);
    CHECK_THROWS_AS(unproject(kBase, SpherePoint{1e-10, 0.0, 1.0}),
                    PoleSingular);
    CHECK_THROWS_AS(unproject(kBase, SpherePoint{0.5, 0.5, 0.5}), DomainError);
}

TEST_CASE("conformal factor matches the metric rule") {
    std::mt19937_64 rng(30);
    std::uniform_real_distribution<double> u(-3.0, 3.0), ud(0.0, 2 * M_PI);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng), y = u(rng), th = ud(rng);
        const double r2 = x * x + y * y;
        const double pred = std::pow((r2 + 1.0) / 2.0, 2);
        const double meas =
            metric_ratio(kMono, x, y, std::cos(th), std::sin(th));
        CHECK(std::abs(meas - pred) / pred <= 1e-6);
    }
}

TEST_CASE("monopole data") {
    const auto m = monopole_data(kMono);
    CHECK(m.b_sphere == Catch::Approx(-0.5).margin(1e-15));
    CHECK(m.total_flux == Catch::Approx(-2.0 * M_PI).epsilon(1e-15));
    CHECK(m.m_charge == Catch::Approx(-1.0).margin(1e-15));

    const auto z = monopole_data(kBase);
    CHECK(z.b_sphere == 0.0);
    CHECK(z.total_flux == 0.0);
    CHECK(z.m_charge == 0.0);

    const auto h = monopole_data(ModelParams(2.0, std::sqrt(2.0), 4.0));
    CHECK(h.total_flux == Catch::Approx(-2.0 * M_PI).epsilon(1e-14));
    CHECK(h.m_charge == Catch::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("plane flux integral converges to the sphere flux") {
    const double f = plane_flux_integral(kMono, 1e3, 4096);
    CHECK(std::abs(f - (-2.0 * M_PI)) / (2.0 * M_PI) <= 1e-5);

    CHECK(plane_flux_integral(kBase, 1e3, 4096) == 0.0);

    // doubling n shrinks the quadrature error at fourth order
    const double exact = -M_PI * kMono.q * 1e6 / (1.0 * (1e6 + 1.0));
    const double e1 = std::abs(plane_flux_integral(kMono, 1e3, 32) - exact);
    const double e2 = std::abs(plane_flux_integral(kMono, 1e3, 64) - exact);
    const double e3 = std::abs(plane_flux_integral(kMono, 1e3, 128) - exact);
    CHECK(e1 / e2 > 8.0);
    CHECK(e2 / e3 > 8.0);

    CHECK_THROWS_AS(plane_flux_integral(kMono, -1.0, 64), DomainError);
    CHECK_THROWS_AS(plane_flux_integral(kMono, 1.0, 8), DomainError);
}

TEST_CASE("projected E=0 orbits are planar (circles map to circles)") {
    std::mt19937_64 rng(40);
    std::uniform_real_distribution<double> upos(-2.0, 2.0), uh(0.0, 2 * M_PI);
    std::uniform_int_distribution<int> uq(0, 2);
    const double qs[3] = {0.0, 2.0, -2.0};
    int done = 0;
    while (done < 30) {
        const ModelParams p(2.0, 1.0, qs[uq(rng)]);
        const auto s0 = make_e0_state(p, upos(rng), upos(rng), uh(rng));
        const auto con = constants_of_motion(p, s0);
        if (std::abs(con.l_z) < 0.3) continue;
        const double tp = period_formula(p, con.l_z);
        if (!(tp > 0.0) || tp > 100.0) continue;
        ++done;
        const auto traj = integrate(p, s0, tp, 1e-10, 360);
        const auto sc = sphere_circle_analysis(p, traj);
        CHECK(sc.planarity_residual <= 1e-6);
    }
}

TEST_CASE("centered r = Rcal orbit maps to the equator") {
    const auto s0 = make_e0_state(kBase, 1.0, 0.0, M_PI / 2.0);
    const auto traj = integrate(kBase, s0, 2.0 * M_PI, 1e-10, 360);
    for (const auto& s : traj.samples) {
        const auto q = project(kBase, s.x, s.y);
        CHECK(std::abs(q.z3) <= 1e-8);
    }
    const auto sc = sphere_circle_analysis(kBase, traj);
    CHECK(std::abs(sc.gamma - M_PI / 2.0) <= 1e-6);
    CHECK_FALSE(sc.omega_pred.has_value());
}

TEST_CASE("cone angle against the exact chord construction") {
    // the image circle passes through the projections of the two chord
    // endpoints (l +- R, 0); its plane normal lies in the xz-plane, giving
    // an independent cos(gamma)
    const auto s0 = orbit_state(kMono, 0.8);
    const auto geo = predict_geometry(kMono, s0);
    const auto traj = integrate(kMono, s0, geo.period_pred, 1e-10, 360);
    const auto sc = sphere_circle_analysis(kMono, traj);

    const auto pp = project(kMono, geo.offset_l + geo.radius_r, 0.0);
    const auto pm = project(kMono, geo.offset_l - geo.radius_r, 0.0);
    // normal direction in the xz-plane, perpendicular to pp-pm
    const double dx = pp.x3 - pm.x3, dz = pp.z3 - pm.z3;
    double nx = -dz, nz = dx;
    const double nn = std::hypot(nx, nz);
    nx /= nn;
    nz /= nn;
    double h = nx * 0.5 * (pp.x3 + pm.x3) + nz * 0.5 * (pp.z3 + pm.z3);
    // orient toward the cap containing the south pole (0,0,-1)
    double cosg;
    if (-nz > h) cosg = h;
    else cosg = -h;
    CHECK(std::cos(sc.gamma) == Catch::Approx(cosg).margin(1e-9));
    REQUIRE(sc.omega_pred.has_value());
    CHECK(*sc.omega_pred ==
          Catch::Approx(std::abs(kMono.q) / (4.0 * cosg)).epsilon(1e-9));
}

TEST_CASE("sign of Q/Lz selects the side of the equator") {
    // chord-image arithmetic: the signed chord intercepts d-+ = l -+ R have
    // product Q/(2Lz) - Rcal^2, and the image spans an arc of
    // 2(arctan d+ - arctan d-) about the south pole. Hence
    //   Q = 0                     -> geodesic, gamma = pi/2 exactly,
    //   Q/(2Lz) in (0, Rcal^2)    -> gamma < pi/2,
    //   Q/(2Lz) < 0               -> gamma > pi/2.
    auto gamma_of = [](double q, double lz) {
        const ModelParams p(2.0, 1.0, q);
        const auto s = orbit_state(p, lz);
        const auto g = predict_geometry(p, s);
        const auto t = integrate(p, s, g.period_pred, 1e-10, 360);
        return sphere_circle_analysis(p, t).gamma;
    };
    CHECK(gamma_of(0.0, 0.5) == Catch::Approx(M_PI / 2.0).margin(1e-6));
    CHECK(gamma_of(+0.4, 0.4) < M_PI / 2.0 - 0.05);   // Q/(2Lz) = +1/2
    CHECK(gamma_of(-0.4, 0.4) > M_PI / 2.0 + 0.05);   // Q/(2Lz) = -1/2
    // far onto the negative branch (|Q/Lz| = 8) the image stays north-side
    CHECK(gamma_of(-3.2, 0.4) > M_PI / 2.0 + 0.2);
}

TEST_CASE("non-planar image raises NotPlanar") {
    // an E < 0 precessing trajectory does not project to a circle
    PhaseState s0{1.0, 0.0, 0.0, 0.55, 0.0};
    REQUIRE(hamiltonian(kMono, s0) < 0.0);
    const auto traj = integrate(kMono, s0, 40.0, 1e-10, 512);
    CHECK_THROWS_AS(sphere_circle_analysis(kMono, traj), NotPlanar);
}

TEST_CASE("the projection is not a dynamical equivalence") {
    // plane period vs the would-be period of a charge on the sphere
    const auto s0 = orbit_state(kMono, 1.0);
    const auto geo = predict_geometry(kMono, s0);
    const auto traj = integrate(kMono, s0, geo.period_pred, 1e-10, 360);
    const auto sc = sphere_circle_analysis(kMono, traj);
    REQUIRE(sc.omega_pred.has_value());
    const double t_sphere = 2.0 * M_PI / std::abs(*sc.omega_pred);
    CHECK(std::abs(t_sphere - geo.period_pred) > 0.2 * geo.period_pred);
}
