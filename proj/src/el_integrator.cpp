#include "rimech/el_integrator.hpp"

#include <cmath>

#include "rimech/errors.hpp"

namespace rimech {

namespace {

// Acceleration from the expanded EL equation
//   Hvv a = dL/dx - (dp/dx) v,
// where Hvv is the velocity Hessian and dp/dx the mixed second-derivative
// block, both refreshed at every stage.
Vec acceleration_regular(const LagrangianSpec& L, const Vec& x, const Vec& v) {
    const HessianReport hr = analyze_velocity_hessian(L, x, v);
    if (hr.singular)
        throw Error(ErrorKind::underdetermined_system,
                    "singular velocity Hessian (row-normalized det " +
                        std::to_string(hr.normalized_det) +
                        "); supply a gauge closure for first-order homogeneous Lagrangians");

    const int n = L.dim;
    Mat mixed(n, n);  // mixed(a,b) = d p_a / d x^b
    Vec probe = x;
    for (int b = 0; b < n; ++b) {
        const double h = numeric::fd_step(x[b]);
        probe[b] = x[b] + h;
        const Vec hi = canonical_momentum(L, probe, v);
        probe[b] = x[b] - h;
        const Vec lo = canonical_momentum(L, probe, v);
        probe[b] = x[b];
        mixed.col(b) = (hi - lo) / (2.0 * h);
    }

    const Vec rhs = position_gradient(L, x, v) - mixed * v;
    return Eigen::FullPivLU<Mat>(hr.hessian).solve(rhs);
}

// One-dimensional conserved-L closure: dL/dlambda = 0 resolves the velocity
// freedom left by a singular Hessian, a = -v (dL/dq) / p.
double acceleration_closed(const LagrangianSpec& L, const Vec& x, const Vec& v) {
    const double p = canonical_momentum(L, x, v)[0];
    if (std::abs(p) < 1e-300)
        throw Error(ErrorKind::division_degenerate, "vanishing momentum in gauge closure");
    return -v[0] * position_gradient(L, x, v)[0] / p;
}

}  // namespace

Trajectory integrate_el(const LagrangianSpec& L, const Vec& x0, const Vec& v0,
                        const std::vector<double>& grid, GaugeClosure closure) {
    if (x0.size() != L.dim || v0.size() != L.dim)
        throw Error(ErrorKind::invalid_dimension, "initial data does not match Lagrangian dim");
    if (closure == GaugeClosure::conserved_lagrangian && L.dim != 1)
        throw Error(ErrorKind::underdetermined_system,
                    "conserved-Lagrangian closure is defined for the one-dimensional system; "
                    "multi-dimensional homogeneous flows need an explicit gauge");

    const int n = L.dim;
    Vec y0(2 * n);
    y0 << x0, v0;

    auto rhs = [&](double, const Vec& y) {
        const Vec x = y.head(n);
        const Vec v = y.tail(n);
        Vec dy(2 * n);
        dy.head(n) = v;
        if (closure == GaugeClosure::conserved_lagrangian) {
            dy[n] = acceleration_closed(L, x, v);
        } else {
            dy.tail(n) = acceleration_regular(L, x, v);
        }
        return dy;
    };

    Trajectory traj;
    traj.kind = TrajectoryKind::configuration;
    traj.samples.reserve(grid.size());
    numeric::rk4(rhs, y0, grid, [&](int, double lambda, const Vec& y) {
        Sample s;
        s.lambda = lambda;
        s.x = y.head(n);
        s.aux = y.tail(n);
        s.diag = L.eval(s.x, s.aux);
        traj.samples.push_back(std::move(s));
    });
    return traj;
}

Trajectory reparametrize(const Trajectory& traj, const std::function<double(double)>& rate) {
    const std::size_t n = traj.size();
    if (n < 2) throw Error(ErrorKind::invalid_dimension, "trajectory too short");

    std::vector<double> lambdas(n), rates(n);
    for (std::size_t i = 0; i < n; ++i) {
        lambdas[i] = traj[i].lambda;
        rates[i] = rate(traj[i].lambda);
        if (!std::isfinite(rates[i]) || std::abs(rates[i]) < 1e-12)
            throw Error(ErrorKind::gauge_degenerate,
                        "rate vanishes at lambda = " + std::to_string(traj[i].lambda));
        if (i > 0 && std::signbit(rates[i]) != std::signbit(rates[0]))
            throw Error(ErrorKind::gauge_degenerate, "rate changes sign on the grid");
    }

    const std::vector<double> xi = numeric::cumulative_trapezoid(lambdas, rates);

    Trajectory out;
    out.kind = traj.kind;
    out.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Sample s = traj[i];
        s.lambda = traj[0].lambda + xi[i];
        s.aux = traj[i].aux / rates[i];
        out.samples.push_back(std::move(s));
    }
    return out;
}

std::vector<double> proper_time_along(const Trajectory& traj, const Metric& m, double c,
                                      double tol) {
    const std::size_t n = traj.size();
    if (n < 2) throw Error(ErrorKind::invalid_dimension, "trajectory too short");

    // g(v,v) is the proper-time radicand when the time axis (index 0, as
    // everywhere in this library) carries the plus sign; with the signs
    // flipped the radicand is -g(v,v).  Counting plus entries instead would
    // misread two-dimensional metrics, where both orders have exactly one.
    if (m.signature.empty())
        throw Error(ErrorKind::invalid_dimension, "metric carries no signature");
    const double sign = (m.signature[0] > 0) ? 1.0 : -1.0;

    std::vector<double> lambdas(n), speed(n);
    for (std::size_t i = 0; i < n; ++i) {
        lambdas[i] = traj[i].lambda;
        double q = sign * norm_squared(m, traj[i].x, traj[i].aux);
        if (q < -tol)
            throw Error(ErrorKind::space_like_segment,
                        "g(v,v) = " + std::to_string(q) + " at lambda = " +
                            std::to_string(traj[i].lambda));
        if (q < 0.0) q = 0.0;
        speed[i] = std::sqrt(q) / c;
    }
    return numeric::cumulative_trapezoid(lambdas, speed);
}

double action_integral(const LagrangianSpec& L, const Trajectory& traj) {
    std::vector<double> lambdas(traj.size()), lvals(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        lambdas[i] = traj[i].lambda;
        lvals[i] = L.eval(traj[i].x, traj[i].aux);
    }
    return numeric::trapezoid(lambdas, lvals);
}

GaugeCheckReport gauge_invariance_check(const std::function<double(double)>& phi,
                                        const Trajectory& traj,
                                        const std::function<double(double)>& rate) {
    if (traj.size() < 5) throw Error(ErrorKind::invalid_dimension, "trajectory too short");
    if (traj[0].x.size() != 1)
        throw Error(ErrorKind::invalid_dimension, "gauge check is for the 1-D system");

    // psi(q) sampled along the path: psi = phi / lambda'(q) and
    // lambda' = dlambda/dxi = 1/rate.
    const std::size_t n = traj.size();
    std::vector<double> psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = phi(traj[i].x[0]) * rate(traj[i].lambda);

    const Trajectory re = reparametrize(traj, rate);

    GaugeCheckReport rep;
    rep.lagrangian_min = std::numeric_limits<double>::infinity();
    rep.lagrangian_max = -rep.lagrangian_min;
    for (std::size_t i = 0; i < n; ++i) {
        const double lag = phi(re[i].x[0]) * re[i].aux[0];
        rep.lagrangian_min = std::min(rep.lagrangian_min, lag);
        rep.lagrangian_max = std::max(rep.lagrangian_max, lag);
    }

    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dxi = re[i + 1].lambda - re[i - 1].lambda;
        const double w = re[i].aux[0];
        if (std::abs(w) < 1e-300 || std::abs(dxi) < 1e-300)
            throw Error(ErrorKind::gauge_degenerate, "degenerate sample in gauge check");
        const double lhs = (1.0 / re[i + 1].aux[0] - 1.0 / re[i - 1].aux[0]) / dxi;
        // d(ln psi)/dq along the path = (d ln psi / dxi) / (dq/dxi).
        const double rhs = (std::log(psi[i + 1]) - std::log(psi[i - 1])) / dxi / w;
        rep.max_mismatch = std::max(rep.max_mismatch, std::abs(lhs - rhs));
    }
    return rep;
}

}  // namespace rimech
