#include <cmath>

#include "doctest.h"
#include "rimech/rel_particle.hpp"
#include "test_support.hpp"

using namespace rimech;

namespace {

BackgroundFields free_particle(int dim) {
    BackgroundFields f;
    f.metric = make_minkowski(dim, SignatureOrder::minus_plus);
    f.m = 1.0;
    return f;
}

// Physical momentum covector of a free particle moving at v3: pi_mu =
// m eta_mu_nu u^nu with u = gamma (c, v3).
ExtendedState free_start(const BackgroundFields& f, const Vec& v3, double c) {
    const int dim = static_cast<int>(v3.size()) + 1;
    Vec x = Vec::Zero(dim);
    const double gamma = gamma_factor(f, x, v3, c);
    Vec u(dim);
    u[0] = gamma * c;
    u.tail(dim - 1) = gamma * v3;
    return ExtendedState{x, f.m * lower_index(f.metric, x, u), 0.0};
}

}  // namespace

TEST_SUITE("rel-particle") {

TEST_CASE("gamma factor in flat and weak-field backgrounds") {
    const BackgroundFields flat = free_particle(2);
    Vec x = Vec::Zero(2);
    Vec v(1);
    v << 0.6;
    CHECK(gamma_factor(flat, x, v, 1.0) == doctest::Approx(1.25).epsilon(1e-14));

    // Comoving clock under U = 0.1 c^2: gamma = 1/sqrt(1 - 2U/c^2) = 1/sqrt(0.8).
    BackgroundFields well = free_particle(2);
    well.metric = make_weak_field_metric([](const Vec&) { return 0.1; }, 2, 1.0);
    CHECK(gamma_factor(well, x, Vec::Zero(1), 1.0) ==
          doctest::Approx(1.118033988749895).epsilon(1e-14));
    CHECK(g00_positive(well, x) == doctest::Approx(0.8).epsilon(1e-14));

    CHECK(thrown_kind([&] {
              Vec fast(1);
              fast << 1.2;
              gamma_factor(flat, x, fast, 1.0);
          }) == ErrorKind::superluminal_state);
}

TEST_CASE("free flight at 0.6c: momentum, energy and elapsed proper time") {
    const BackgroundFields f = free_particle(2);
    Vec x3(1), v3(1);
    x3 << 0.0;
    v3 << 0.6;
    const Trajectory traj =
        integrate_coordinate_time(f, 0.0, x3, v3, numeric::linspace(0.0, 1.0, 1001), 1.0);

    const Sample& end = traj.samples.back();
    CHECK(end.x[1] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(end.x[0] == doctest::Approx(1.0).epsilon(1e-12));
    // aux is the contravariant momentum (m gamma c, m gamma v) = (1.25, 0.75).
    CHECK(end.aux[0] == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(end.aux[1] == doctest::Approx(0.75).epsilon(1e-12));
    // The energy diagnostic holds still.
    for (const Sample& s : traj.samples)
        CHECK(s.diag == doctest::Approx(traj.samples[0].diag).epsilon(1e-12));

    // tau = integral dt/gamma: 0.8 over one unit of t at this speed.
    std::vector<double> ts, inv_gamma;
    for (const Sample& s : traj.samples) {
        ts.push_back(s.lambda);
        inv_gamma.push_back(f.m * 1.0 / s.aux[0]);
    }
    CHECK(numeric::cumulative_trapezoid(ts, inv_gamma).back() ==
          doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("mass shell membership of the physical momentum") {
    const BackgroundFields f = free_particle(4);
    Vec v3(3);
    v3 << 0.6, 0.0, 0.0;
    const ExtendedState s = free_start(f, v3, 1.0);
    CHECK(mass_shell_residual(f, s.x, s.p, 1.0) < 1e-12);

    // Deliberately off shell.
    Vec bad = s.p;
    bad[0] *= 1.1;
    CHECK(mass_shell_residual(f, s.x, bad, 1.0) > 0.1);
}

TEST_CASE("energy from momentum rejects unreachable temporal components") {
    const BackgroundFields f = free_particle(2);
    Vec x = Vec::Zero(2);
    Vec pi3(1);
    pi3 << 1.0;
    // gamma^2 = (g00 - p.p/p0^2)^{-1} needs p0^2 > p.p/g00.
    CHECK(thrown_kind([&] { energy_h_momentum(f, x, pi3, 0.5, 1.0); }) ==
          ErrorKind::off_shell_state);

    const double fine = energy_h_momentum(f, x, pi3, 2.0, 1.0);
    CHECK(std::isfinite(fine));
}

TEST_CASE("constant electric field delivers the textbook force magnitude") {
    // A0 = -E0 x1 / c puts a uniform field along x1; at v << c the momentum
    // rate must equal q E0 to first order.
    const double E0 = 2.0, q = 0.5;
    BackgroundFields f = free_particle(2);
    f.q_charge = q;
    f.A = [E0](const Vec& x) {
        Vec a = Vec::Zero(2);
        a[0] = -E0 * x[1];
        return a;
    };

    Vec x3(1), v3(1);
    x3 << 0.0;
    v3 << 1e-3;
    const Trajectory traj =
        integrate_coordinate_time(f, 0.0, x3, v3, numeric::linspace(0.0, 0.01, 101), 1.0);
    const double dp = traj.samples.back().aux[1] - traj.samples.front().aux[1];
    CHECK(std::abs(dp / 0.01) == doctest::Approx(q * E0).epsilon(1e-5));
}

TEST_CASE("magnetic orbit: circular at the textbook radius, speed pinned") {
    // B = 1 out of plane via the symmetric gauge, v = 0.6 in the plane:
    // radius gamma m v / (q B) = 0.75, period 2 pi gamma m / (q B).
    const double B = 1.0;
    BackgroundFields f = free_particle(4);
    f.q_charge = 1.0;
    f.A = [B](const Vec& x) {
        Vec a = Vec::Zero(4);
        a[1] = -0.5 * B * x[2];
        a[2] = 0.5 * B * x[1];
        return a;
    };

    const double period = 7.853981633974483;
    Vec x3 = Vec::Zero(3);
    Vec v3(3);
    v3 << 0.6, 0.0, 0.0;
    const Trajectory traj = integrate_coordinate_time(
        f, 0.0, x3, v3, numeric::linspace(0.0, period, 2501), 1.0);

    const double p_ref = traj.samples.front().aux.tail(3).norm();
    CHECK(p_ref == doctest::Approx(0.75).epsilon(1e-12));
    double max_r = 0.0;
    for (const Sample& s : traj.samples) {
        CHECK(s.aux.tail(3).norm() == doctest::Approx(p_ref).epsilon(1e-7));
        max_r = std::max(max_r, s.x.tail(3).norm());
    }
    // Diameter of the circle through the origin.
    CHECK(max_r == doctest::Approx(1.5).epsilon(1e-4));
    CHECK((traj.samples.back().x - traj.samples.front().x).tail(3).norm() < 1e-5);
}

TEST_CASE("proper-time flow retraces the coordinate-time trajectory") {
    BackgroundFields f = free_particle(2);
    f.metric = make_weak_field_metric([](const Vec& x) { return 0.02 * std::sin(x[1]); }, 2, 1.0);
    f.U = [](const Vec& x) { return 0.02 * std::sin(x[1]); };

    Vec x3(1), v3(1);
    x3 << 0.4;
    v3 << 0.3;
    const std::vector<double> t_grid = numeric::linspace(0.0, 1.0, 1001);
    const Trajectory coord = integrate_coordinate_time(f, 0.0, x3, v3, t_grid, 1.0);

    std::vector<double> inv_gamma(coord.samples.size());
    for (std::size_t k = 0; k < coord.samples.size(); ++k)
        inv_gamma[k] = f.m / coord.samples[k].aux[0];
    const std::vector<double> tau = numeric::cumulative_trapezoid(t_grid, inv_gamma);

    Vec x0 = Vec::Zero(2);
    x0[1] = 0.4;
    const double gamma0 = gamma_factor(f, x0, v3, 1.0);
    Vec u(2);
    u << gamma0, gamma0 * 0.3;
    const ExtendedState s0{x0, f.m * lower_index(f.metric, x0, u), 0.0};
    const Trajectory proper = integrate_proper_time(f, s0, tau, 1.0);

    double mismatch = 0.0, shell = 0.0;
    for (std::size_t k = 0; k < coord.samples.size(); ++k) {
        mismatch = std::max(
            mismatch, (proper.samples[k].x - coord.samples[k].x).cwiseAbs().maxCoeff());
        shell = std::max(shell, proper.samples[k].diag);
    }
    CHECK(mismatch < 1e-6);
    CHECK(shell < 1e-8);

    CHECK(weak_field_consistency(f, {x0, 2.0 * x0}, 1.0) < 1e-12);
}

TEST_CASE("the unmodified quadratic generator runs twice as fast") {
    const BackgroundFields f = free_particle(2);
    Vec v3(1);
    v3 << 0.3;
    const ExtendedState s = free_start(f, v3, 1.0);

    const ProperRhs half = proper_time_rhs_tilde(f, s, 1.0, ProperHVariant::halved);
    const ProperRhs full = proper_time_rhs_tilde(f, s, 1.0, ProperHVariant::unmodified);
    for (int mu = 0; mu < 2; ++mu) {
        if (std::abs(half.dx_dtau[mu]) < 1e-12) continue;
        CHECK(full.dx_dtau[mu] / half.dx_dtau[mu] == doctest::Approx(2.0).epsilon(1e-12));
    }
    // And the halved one is the physical four-velocity.
    CHECK(half.dx_dtau[0] == doctest::Approx(1.0 / std::sqrt(0.91)).epsilon(1e-12));
    CHECK(half.dx_dtau[1] == doctest::Approx(0.3 / std::sqrt(0.91)).epsilon(1e-12));
}

TEST_CASE("extended coordinate-time generator matches the direct integrator") {
    BackgroundFields f = free_particle(2);
    const double c = 1.0;

    Vec x3(1), v3(1);
    x3 << 0.0;
    v3 << 0.6;
    const std::vector<double> grid = numeric::linspace(0.0, 1.0, 501);
    const Trajectory direct = integrate_coordinate_time(f, 0.0, x3, v3, grid, c);

    // Same physics through H = h(x, pi) + c p0 with the all-plus bracket:
    // p0 = -h/c on shell, spatial momentum m gamma v.
    const ExtHamiltonian H = make_rel_coordinate_H(f, c);
    ExtendedState s0;
    s0.x = Vec::Zero(2);
    s0.p = Vec(2);
    s0.p[1] = 0.75;
    s0.p[0] = -energy_h_momentum(f, s0.x, s0.p.tail(1), c) / c;
    REQUIRE(std::abs(H.eval(s0)) < 1e-12);

    EvolveOptions opts;
    opts.convention = BracketConvention::all_plus;
    const Trajectory ext = evolve(H, s0, grid, opts);

    CHECK(parametrization_rate(H, s0, c, BracketConvention::all_plus) ==
          doctest::Approx(1.0).epsilon(1e-9));
    double gap = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        gap = std::max(gap, (ext.samples[k].x - direct.samples[k].x).cwiseAbs().maxCoeff());
    CHECK(gap < 1e-8);
}

TEST_CASE("extended proper-time generator against in-test derivatives") {
    const BackgroundFields f = free_particle(2);
    const double c = 1.0;
    const ExtHamiltonian H = make_rel_proper_H(f, c);

    const double P = 0.3 / std::sqrt(0.91);  // m gamma v at v = 0.3

    // The constraint H(p0) = P^2/2m + mc^2 + p0 c gamma(p0) = 0 with
    // gamma = (1 - P^2/p0^2)^{-1/2} is solved here by bisection; the
    // library is then evaluated at that root.
    auto eval_p0 = [&](double p0) {
        const double gamma = 1.0 / std::sqrt(1.0 - P * P / (p0 * p0));
        return P * P / 2.0 + 1.0 + p0 * gamma;
    };
    double lo = -std::sqrt(2.0) * P, hi = -5.0;  // eval(lo) > 0 > eval(hi)
    REQUIRE(eval_p0(lo) > 0.0);
    REQUIRE(eval_p0(hi) < 0.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (eval_p0(mid) > 0.0 ? lo : hi) = mid;
    }
    const double p0_root = 0.5 * (lo + hi);

    ExtendedState s;
    s.x = Vec::Zero(2);
    s.p = Vec(2);
    s.p << p0_root, P;
    CHECK(std::abs(H.eval(s)) < 1e-10);

    // Rate oracle: dH/dp0 / c = gamma - gamma^3 P^2 / p0^2, by hand.
    const double gamma = 1.0 / std::sqrt(1.0 - P * P / (p0_root * p0_root));
    const double want = gamma - gamma * gamma * gamma * P * P / (p0_root * p0_root);
    CHECK(parametrization_rate(H, s, c, BracketConvention::all_plus) ==
          doctest::Approx(want).epsilon(1e-7));

    Vec tiny(2);
    tiny << -0.1, P;  // |p0| < P: gamma unrecoverable
    CHECK(thrown_kind([&] { H.eval(ExtendedState{s.x, tiny, 0.0}); }) ==
          ErrorKind::off_shell_state);
    Vec zero(2);
    zero << 0.0, P;
    CHECK(thrown_kind([&] { H.eval(ExtendedState{s.x, zero, 0.0}); }) ==
          ErrorKind::division_degenerate);
}

TEST_CASE("comoving consistency flags a static electric field") {
    // The condition compares A_{rho,0} with A_{0,rho} + (mc/2) g00_{,rho}; a
    // static E-field satisfies neither side's cancellation, a free particle
    // does trivially.
    BackgroundFields plain = free_particle(2);
    CHECK(comoving_consistency(plain, {Vec::Zero(2)}, 1.0) < 1e-12);

    BackgroundFields efield = free_particle(2);
    efield.q_charge = 0.5;
    efield.A = [](const Vec& x) {
        Vec a = Vec::Zero(2);
        a[0] = -2.0 * x[1];
        return a;
    };
    CHECK(comoving_consistency(efield, {Vec::Zero(2)}, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-6));
}

}  // TEST_SUITE
