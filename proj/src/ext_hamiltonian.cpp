#include "rimech/ext_hamiltonian.hpp"

#include <cmath>

#include "rimech/errors.hpp"

namespace rimech {

Observable coordinate_observable(int mu, int dim) {
    Observable o;
    o.eval = [mu](const ExtendedState& s) { return s.x[mu]; };
    o.exact_grad = [mu, dim](const ExtendedState&) {
        PhaseGradient g{Vec::Zero(dim), Vec::Zero(dim)};
        g.dx[mu] = 1.0;
        return g;
    };
    return o;
}

Observable momentum_observable(int mu, int dim) {
    Observable o;
    o.eval = [mu](const ExtendedState& s) { return s.p[mu]; };
    o.exact_grad = [mu, dim](const ExtendedState&) {
        PhaseGradient g{Vec::Zero(dim), Vec::Zero(dim)};
        g.dp[mu] = 1.0;
        return g;
    };
    return o;
}

PhaseGradient observable_gradient(const Observable& f, const ExtendedState& s) {
    if (f.exact_grad) return f.exact_grad(s);

    const int dim = static_cast<int>(s.x.size());
    PhaseGradient g{Vec(dim), Vec(dim)};
    ExtendedState probe = s;
    for (int i = 0; i < dim; ++i) {
        const double h = numeric::fd_step(s.x[i]);
        probe.x[i] = s.x[i] + h;
        const double hi = f.eval(probe);
        probe.x[i] = s.x[i] - h;
        const double lo = f.eval(probe);
        probe.x[i] = s.x[i];
        if (!std::isfinite(hi) || !std::isfinite(lo))
            throw Error(ErrorKind::derivative_failure, "non-finite position probe");
        g.dx[i] = (hi - lo) / (2.0 * h);
    }
    for (int i = 0; i < dim; ++i) {
        const double h = numeric::fd_step(s.p[i]);
        probe.p[i] = s.p[i] + h;
        const double hi = f.eval(probe);
        probe.p[i] = s.p[i] - h;
        const double lo = f.eval(probe);
        probe.p[i] = s.p[i];
        if (!std::isfinite(hi) || !std::isfinite(lo))
            throw Error(ErrorKind::derivative_failure, "non-finite momentum probe");
        g.dp[i] = (hi - lo) / (2.0 * h);
    }
    return g;
}

namespace {

double bracket_from_gradients(const PhaseGradient& f, const PhaseGradient& g,
                              BracketConvention conv) {
    const int dim = static_cast<int>(f.dx.size());
    double acc = 0.0;
    for (int i = 1; i < dim; ++i) acc += f.dx[i] * g.dp[i] - f.dp[i] * g.dx[i];
    const double time_term = f.dx[0] * g.dp[0] - f.dp[0] * g.dx[0];
    return conv == BracketConvention::time_minus ? acc - time_term : acc + time_term;
}

void check_state(const ExtendedState& s, int dim) {
    if (s.x.size() != dim || s.p.size() != dim)
        throw Error(ErrorKind::invalid_dimension,
                    "state dimension does not match Hamiltonian dim " + std::to_string(dim));
}

}  // namespace

double ext_bracket(const Observable& f, const Observable& g, const ExtendedState& s,
                   BracketConvention conv) {
    if (s.x.size() != s.p.size())
        throw Error(ErrorKind::invalid_dimension, "state x/p length mismatch");
    return bracket_from_gradients(observable_gradient(f, s), observable_gradient(g, s), conv);
}

Trajectory evolve(const ExtHamiltonian& H, const ExtendedState& s0,
                  const std::vector<double>& grid, const EvolveOptions& opts) {
    check_state(s0, H.dim);

    const double init = std::abs(H.eval(s0));
    if (!opts.monitor_only && init > opts.init_tol)
        throw Error(ErrorKind::constraint_violation,
                    "initial |H| = " + std::to_string(init) +
                        " is off the constraint surface; use monitor-only to study it anyway");

    const int n = H.dim;
    const Observable ho = H.as_observable();
    const double sgn = opts.convention == BracketConvention::time_minus ? -1.0 : 1.0;

    // Hamilton equations written out once per stage: the spatial pairs are
    // canonical, the (x0, p0) pair carries the convention sign.
    auto rhs = [&](double lambda, const Vec& y) {
        ExtendedState s;
        s.x = y.head(n);
        s.p = y.tail(n);
        s.lambda = lambda;
        const PhaseGradient g = observable_gradient(ho, s);
        Vec dy(2 * n);
        for (int i = 1; i < n; ++i) {
            dy[i] = g.dp[i];
            dy[n + i] = -g.dx[i];
        }
        dy[0] = sgn * g.dp[0];
        dy[n] = -sgn * g.dx[0];
        return dy;
    };

    Vec y0(2 * n);
    y0 << s0.x, s0.p;

    Trajectory traj;
    traj.kind = TrajectoryKind::phase;
    traj.samples.reserve(grid.size());
    numeric::rk4(rhs, y0, grid, [&](int, double lambda, const Vec& y) {
        Sample smp;
        smp.lambda = lambda;
        smp.x = y.head(n);
        smp.aux = y.tail(n);
        ExtendedState s{smp.x, smp.aux, lambda};
        smp.diag = std::abs(H.eval(s));
        if (!opts.monitor_only && smp.diag > opts.drift_tol)
            throw Error(ErrorKind::constraint_violation,
                        "constraint residual " + std::to_string(smp.diag) + " at lambda = " +
                            std::to_string(lambda));
        traj.samples.push_back(std::move(smp));
    });
    return traj;
}

double parametrization_rate(const ExtHamiltonian& H, const ExtendedState& s, double c,
                            BracketConvention conv) {
    check_state(s, H.dim);
    const PhaseGradient g = observable_gradient(H.as_observable(), s);
    const double dx0 = (conv == BracketConvention::time_minus ? -1.0 : 1.0) * g.dp[0];
    return dx0 / c;
}

double constraint_residual(const ExtHamiltonian& H, const ExtendedState& s) {
    check_state(s, H.dim);
    return std::abs(H.eval(s));
}

ExtHamiltonian make_coordinate_time_H(const Observable& Hcl, int dim, double c) {
    ExtHamiltonian H;
    H.dim = dim;
    H.label = HLabel::coordinate_time;
    H.eval = [Hcl, c](const ExtendedState& s) { return Hcl.eval(s) - c * s.p[0]; };
    if (Hcl.exact_grad) {
        H.exact_grad = [Hcl, c](const ExtendedState& s) {
            PhaseGradient g = Hcl.exact_grad(s);
            g.dp[0] -= c;
            return g;
        };
    }
    return H;
}

namespace {
double phi_checked(const std::function<double(double)>& phi, double arg) {
    const double value = phi(arg);
    if (!std::isfinite(value) || std::abs(value) < 1e-12)
        throw Error(ErrorKind::gauge_degenerate,
                    "phi vanishes at " + std::to_string(arg) + "; the gauge is degenerate");
    return value;
}
}  // namespace

ExtHamiltonian make_proper_time_H(const std::function<double(double)>& phi, int dim, double c) {
    ExtHamiltonian H;
    H.dim = dim;
    H.label = HLabel::proper_time;
    H.eval = [phi, c](const ExtendedState& s) {
        return 1.0 - s.p[0] / phi_checked(phi, s.x[0] / c);
    };
    return H;
}

ExtHamiltonian make_proper_length_H(const std::function<double(double)>& phi, int dim) {
    if (dim < 2)
        throw Error(ErrorKind::invalid_dimension, "proper-length form needs a spatial axis");
    ExtHamiltonian H;
    H.dim = dim;
    H.label = HLabel::proper_length;
    H.eval = [phi](const ExtendedState& s) { return s.p[1] / phi_checked(phi, s.x[1]) - 1.0; };
    return H;
}

ExtHamiltonian make_momentum_H(double p_ref, int dim) {
    if (dim < 2)
        throw Error(ErrorKind::invalid_dimension, "momentum form needs a spatial axis");
    ExtHamiltonian H;
    H.dim = dim;
    H.label = HLabel::momentum;
    H.eval = [p_ref](const ExtendedState& s) { return s.p[1] - p_ref; };
    H.exact_grad = [dim](const ExtendedState&) {
        PhaseGradient g{Vec::Zero(dim), Vec::Zero(dim)};
        g.dp[1] = 1.0;
        return g;
    };
    return H;
}

ExtHamiltonian make_moving_particle_H(double v, double p1_0, double E, int dim) {
    if (dim < 2)
        throw Error(ErrorKind::invalid_dimension, "moving-particle form needs a spatial axis");
    ExtHamiltonian H;
    H.dim = dim;
    H.label = HLabel::moving_particle;
    H.eval = [v, p1_0, E](const ExtendedState& s) {
        return v * (s.p[1] - p1_0) - (s.p[0] - E);
    };
    H.exact_grad = [v, dim](const ExtendedState&) {
        PhaseGradient g{Vec::Zero(dim), Vec::Zero(dim)};
        g.dp[0] = -1.0;
        g.dp[1] = v;
        return g;
    };
    return H;
}

ExtHamiltonian gauge_relate_H(const ExtHamiltonian& H_lambda,
                              const std::function<double(const ExtendedState&)>& rate,
                              const Observable& I, const std::vector<ExtendedState>& probes,
                              BracketConvention conv, double tol) {
    for (const ExtendedState& s : probes) {
        const double ival = I.eval(s);
        if (std::abs(ival) > tol)
            throw Error(ErrorKind::not_an_integral,
                        "I = " + std::to_string(ival) +
                            " does not vanish on the constraint surface probe");
        const double br = ext_bracket(I, H_lambda.as_observable(), s, conv);
        if (std::abs(br) > tol)
            throw Error(ErrorKind::not_an_integral,
                        "[[I,H]] = " + std::to_string(br) + " at a probe; I is not conserved");
    }

    ExtHamiltonian out;
    out.dim = H_lambda.dim;
    out.label = HLabel::custom;
    out.eval = [H_lambda, I, rate](const ExtendedState& s) {
        const double r = rate(s);
        if (!std::isfinite(r) || std::abs(r) < 1e-12)
            throw Error(ErrorKind::gauge_degenerate, "rate vanishes at the evaluation state");
        return (H_lambda.eval(s) + I.eval(s)) / r;
    };
    return out;
}

}  // namespace rimech
