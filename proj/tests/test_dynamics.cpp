#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "morbit/dynamics.hpp"
#include "morbit/geometry.hpp"
#include "morbit/invariants.hpp"

using namespace morbit;

namespace {
const ModelParams kBase(2.0, 1.0, 0.0);
const ModelParams kMono(2.0, 1.0, 2.0);
const PhaseState kCanonical{2.0, 0.0, 0.0, 0.4, 0.0};
}  // namespace

TEST_CASE("phase-space derivative") {
    // Q=0, r=1, P=(0,1): Pdot = -grad V = -(V'/r) r = -(1,0)
    PhaseState s{1.0, 0.0, 0.0, 1.0, 0.0};
    const auto d = derivative(kBase, s);
    CHECK(d.dx == 0.0);
    CHECK(d.dy == 1.0);
    CHECK(d.dpx == Catch::Approx(-1.0).margin(1e-15));
    CHECK(d.dpy == Catch::Approx(0.0).margin(1e-15));

    // pure magnetic force: alpha -> 0, Pdot perpendicular to P, |Pdot|=|B||P|
    const ModelParams weak(1e-14, 1.0, 2.0);
    PhaseState sm{0.5, -0.3, 0.7, 0.2, 0.0};
    const auto dm = derivative(weak, sm);
    const double b = magnetic_field(weak, sm.r2());
    CHECK(dm.dpx * sm.px + dm.dpy * sm.py == Catch::Approx(0.0).margin(1e-12));
    CHECK(std::hypot(dm.dpx, dm.dpy) ==
          Catch::Approx(std::abs(b) * sm.mom().norm()).epsilon(1e-10));

    // rest: rdot = 0, Pdot = -grad V
    PhaseState r0{0.8, 0.0, 0.0, 0.0, 0.0};
    const auto dr = derivative(kMono, r0);
    CHECK(dr.dx == 0.0);
    CHECK(dr.dy == 0.0);
    CHECK(dr.dpx < 0.0);  // attractive
    CHECK(dr.dpy == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("integrate: closure of an E=0 orbit over one period") {
    const double T = 3.0 * M_PI;
    const auto traj = integrate(kMono, kCanonical, T, 1e-10, 512);
    REQUIRE(traj.samples.size() == 512);
    const auto& last = traj.samples.back();
    CHECK(std::hypot(last.x - kCanonical.x, last.y - kCanonical.y) <= 1e-7);
    CHECK(traj.energy_drift <= 100.0 * traj.tol);
    for (size_t i = 1; i < traj.samples.size(); ++i)
        CHECK(traj.samples[i].t > traj.samples[i - 1].t);
}

TEST_CASE("integrate: tiny t_max yields a two-sample trajectory") {
    const auto traj = integrate(kMono, kCanonical, 1e-13, 1e-10, 2);
    REQUIRE(traj.samples.size() == 2);
    CHECK(traj.samples.front().x == Catch::Approx(kCanonical.x).margin(1e-12));
    CHECK(traj.samples.back().x == Catch::Approx(kCanonical.x).margin(1e-12));
}

TEST_CASE("integrate: centered circle stays at r = Rcal") {
    // Q=0, L_z = L_max = 1: centered circle through r = Rcal
    const auto s0 = make_e0_state(kBase, 1.0, 0.0, M_PI / 2.0);
    const auto traj = integrate(kBase, s0, 2.0 * M_PI, 1e-10, 512);
    for (const auto& s : traj.samples)
        CHECK(std::abs(s.r() - 1.0) <= 1e-8);
}

TEST_CASE("integrate input validation") {
    CHECK_THROWS_AS(integrate(kBase, kCanonical, -1.0, 1e-10), DomainError);
    CHECK_THROWS_AS(integrate(kBase, kCanonical, 1.0, 1e-2), DomainError);
    CHECK_THROWS_AS(integrate(kBase, kCanonical, 1.0, 1e-15), DomainError);
}

TEST_CASE("measure_period: formula values") {
    // centered circle, Q=0, L_z=1: T = pi alpha/|L|^3 = 2 pi
    const auto s0 = make_e0_state(kBase, 1.0, 0.0, M_PI / 2.0);
    const double t0 = measure_period(kBase, s0, 1e-10);
    CHECK(t0 == Catch::Approx(2.0 * M_PI).epsilon(1e-8));

    // canonical monopole orbit: T = 2 pi + pi = 3 pi
    const double t1 = measure_period(kMono, kCanonical, 1e-10);
    CHECK(t1 == Catch::Approx(3.0 * M_PI).epsilon(1e-6));
}

TEST_CASE("measure_period: unbound orbit escapes") {
    // E > 0 radial launch
    PhaseState out{1.0, 0.0, 2.0, 0.1, 0.0};
    REQUIRE(hamiltonian(kBase, out) > 0.0);
    CHECK_THROWS_AS(measure_period(kBase, out, 1e-10), Unbound);
}

TEST_CASE("energy conserved over ten periods, invariants over one") {
    const double T = 3.0 * M_PI;
    const auto traj10 = integrate(kMono, kCanonical, 10.0 * T, 1e-10, 2048);
    CHECK(traj10.energy_drift <= 100.0 * traj10.tol);

    const auto traj = integrate(kMono, kCanonical, T, 1e-10, 1024);
    const auto con0 = constants_of_motion(kMono, traj.samples.front());
    double lz_d = 0.0, j_d = 0.0;
    for (const auto& s : traj.samples) {
        const auto con = constants_of_motion(kMono, s);
        lz_d = std::max(lz_d, std::abs(con.l_z - con0.l_z));
        j_d = std::max(j_d, (con.j - con0.j).norm());
    }
    CHECK(lz_d <= 1e-7 * (std::abs(con0.l_z) + 1.0));
    CHECK(j_d <= 1e-7 * (con0.j.norm() + 1.0));
}

TEST_CASE("off-shell: L_z conserved, dJ/dt = 4E e_z x r") {
    // an E < 0 bound state
    PhaseState s0{1.0, 0.0, 0.0, 0.6, 0.0};
    const double e0 = hamiltonian(kMono, s0);
    REQUIRE(e0 < 0.0);
    const auto traj = integrate(kMono, s0, 10.0, 1e-11, 256);
    const auto con0 = constants_of_motion(kMono, traj.samples.front());
    double lz_d = 0.0;
    for (const auto& s : traj.samples) {
        lz_d = std::max(lz_d,
                        std::abs(constants_of_motion(kMono, s).l_z - con0.l_z));
    }
    CHECK(lz_d <= 1e-8);

    // finite-difference dJ/dt against 4 E e_z x r (sign fixed by the bracket
    // orientation; see invariants)
    for (double t : {1.0, 3.0, 7.5}) {
        const double dt = 1e-6;
        const auto a = integrate(kMono, s0, t - dt, 1e-12, 2).samples.back();
        const auto b = integrate(kMono, s0, t + dt, 1e-12, 2).samples.back();
        const auto mid = integrate(kMono, s0, t, 1e-12, 2).samples.back();
        const Vec2 djdt = (constants_of_motion(kMono, b).j -
                           constants_of_motion(kMono, a).j) /
                          (2.0 * dt);
        const Vec2 expect = 4.0 * e0 * mid.pos().perp();
        CHECK(djdt.x == Catch::Approx(expect.x).epsilon(1e-5).margin(1e-6));
        CHECK(djdt.y == Catch::Approx(expect.y).epsilon(1e-5).margin(1e-6));
    }
}

TEST_CASE("time reversal with Q negation retraces the path") {
    const ModelParams neg(kMono.alpha, kMono.r_cal, -kMono.q);
    const double T = 2.5;
    const auto fwd = integrate(kMono, kCanonical, T, 1e-11, 128);
    const auto& end = fwd.samples.back();
    PhaseState back{end.x, end.y, -end.px, -end.py, 0.0};
    const auto rev = integrate(neg, back, T, 1e-11, 128);
    for (size_t i = 0; i < rev.samples.size(); ++i) {
        const auto& f = fwd.samples[fwd.samples.size() - 1 - i];
        const auto& r = rev.samples[i];
        CHECK(r.x == Catch::Approx(f.x).margin(1e-7));
        CHECK(r.y == Catch::Approx(f.y).margin(1e-7));
    }
}

TEST_CASE("random E=0 orbits close and keep their constants") {
    std::mt19937_64 rng(314);
    std::uniform_real_distribution<double> upos(-2.0, 2.0), uh(0.0, 2 * M_PI);
    int done = 0;
    while (done < 25) {
        const auto s0 = make_e0_state(kMono, upos(rng), upos(rng), uh(rng));
        const auto con = constants_of_motion(kMono, s0);
        if (std::abs(con.l_z) < 0.25) continue;
        const double tp = period_formula(kMono, con.l_z);
        if (!(tp > 0.0) || tp > 150.0) continue;
        ++done;
        const double tm = measure_period(kMono, s0, 1e-10);
        CHECK(tm == Catch::Approx(tp).epsilon(1e-6));
    }
}
