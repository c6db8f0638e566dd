#include "rimech/rel_particle.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "rimech/errors.hpp"

namespace rimech {
namespace {

void validate(const BackgroundFields& f) {
    if (!(f.m > 0.0)) {
        throw Error(ErrorKind::constraint_violation, "background fields: rest mass must be positive");
    }
    if (f.metric.dim < 2 || !f.metric.eval) {
        throw Error(ErrorKind::invalid_dimension, "background fields: metric must cover time plus space");
    }
}

// Central-difference step for user-supplied field callables, tied to the
// declared length scale rather than to machine heuristics alone.
double field_step(const BackgroundFields& f, double coord) {
    static const double k = std::cbrt(std::numeric_limits<double>::epsilon());
    return k * std::max({1.0, f.length_scale, std::abs(coord)});
}

Vec potential_at(const BackgroundFields& f, const Vec& x) {
    if (!f.A) return Vec::Zero(x.size());
    Vec a = f.A(x);
    if (a.size() != x.size()) {
        throw Error(ErrorKind::invalid_dimension, "electromagnetic potential has wrong component count");
    }
    return a;
}

// dA(mu, nu) = d A_nu / d x^mu
Mat potential_jacobian(const BackgroundFields& f, const Vec& x) {
    const auto d = x.size();
    if (!f.A) return Mat::Zero(d, d);
    if (f.dA) return f.dA(x);
    Mat out(d, d);
    for (Eigen::Index mu = 0; mu < d; ++mu) {
        const double h = field_step(f, x[mu]);
        Vec xp = x, xm = x;
        xp[mu] += h;
        xm[mu] -= h;
        out.row(mu) = ((f.A(xp) - f.A(xm)) / (2.0 * h)).transpose();
    }
    if (!out.allFinite()) {
        throw Error(ErrorKind::derivative_failure, "electromagnetic potential derivative is not finite");
    }
    return out;
}

// d g_{mu nu} / d x^rho
Mat metric_derivative(const BackgroundFields& f, const Vec& x, Eigen::Index rho) {
    const double h = field_step(f, x[rho]);
    Vec xp = x, xm = x;
    xp[rho] += h;
    xm[rho] -= h;
    Mat out = (f.metric.eval(xp) - f.metric.eval(xm)) / (2.0 * h);
    if (!out.allFinite()) {
        throw Error(ErrorKind::derivative_failure, "metric derivative is not finite");
    }
    return out;
}

struct SpatialSquare {
    double value = 0.0;  // g^{ij} p_i p_j over the spatial block
    Vec raised;          // g^{ij} p_j
};

SpatialSquare spatial_square(const Mat& g, const Vec& p3) {
    const auto n = p3.size();
    Eigen::FullPivLU<Mat> lu(g.bottomRightCorner(n, n));
    if (!lu.isInvertible()) {
        throw Error(ErrorKind::division_degenerate, "spatial metric block is singular");
    }
    SpatialSquare s;
    s.raised = lu.solve(p3);
    s.value = p3.dot(s.raised);
    return s;
}

// On-shell gamma from the spatial momentum square:
// gamma^2 g00 = 1 + P^2/(mc)^2.
double gamma_on_shell(const BackgroundFields& f, double g00p, double P2, double c) {
    if (g00p <= 0.0) {
        throw Error(ErrorKind::superluminal_state, "clock factor g00 is not positive here");
    }
    return std::sqrt((1.0 + P2 / (f.m * f.m * c * c)) / g00p);
}

}  // namespace

double g00_positive(const BackgroundFields& f, const Vec& x) {
    return -f.metric.eval(x)(0, 0);
}

double weak_field_consistency(const BackgroundFields& f, const std::vector<Vec>& probes,
                              double c) {
    if (!f.U) return 0.0;
    double worst = 0.0;
    for (const Vec& x : probes) {
        const double expected = 1.0 - 2.0 * f.U(x) / (c * c);
        worst = std::max(worst, std::abs(g00_positive(f, x) - expected));
    }
    return worst;
}

double gamma_factor(const BackgroundFields& f, const Vec& x, const Vec& v3, double c) {
    validate(f);
    const auto n = f.metric.dim - 1;
    if (x.size() != f.metric.dim || v3.size() != n) {
        throw Error(ErrorKind::invalid_dimension, "gamma factor: position/velocity size mismatch");
    }
    const Mat g = f.metric.eval(x);
    const double v2 = v3.dot(g.bottomRightCorner(n, n) * v3);
    const double radicand = -g(0, 0) - v2 / (c * c);
    if (radicand <= 0.0) {
        throw Error(ErrorKind::superluminal_state, "state is not sub-luminal: g00 - v.v/c^2 <= 0");
    }
    return 1.0 / std::sqrt(radicand);
}

CoordinateRhs coordinate_time_rhs(const BackgroundFields& f, double t, const Vec& x3,
                                  const Vec& v3, double c) {
    validate(f);
    const int d = f.metric.dim;
    const auto n = d - 1;
    Vec x(d);
    x[0] = c * t;
    x.tail(n) = x3;

    const double gam = gamma_factor(f, x, v3, c);
    const Mat dA = potential_jacobian(f, x);

    CoordinateRhs rhs;
    rhs.dx_dt = v3;
    rhs.dp_dt = Vec(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index I = i + 1;
        // qc(A_{0,i} - A_{i,0}) + q(A_{j,i} - A_{i,j}) v^j
        double force = f.q_charge * c * (dA(I, 0) - dA(0, I));
        for (Eigen::Index j = 0; j < n; ++j) {
            force += f.q_charge * (dA(I, j + 1) - dA(j + 1, I)) * v3[j];
        }
        // mc^2 gamma^{-2} gamma_{,i} = -(mc^2 gamma / 2)(g00_{,i} - g_{jk,i} v^j v^k / c^2)
        const Mat dg = metric_derivative(f, x, I);
        const double dg00p = -dg(0, 0);
        const double dv2 = v3.dot(dg.bottomRightCorner(n, n) * v3);
        force -= 0.5 * f.m * c * c * gam * (dg00p - dv2 / (c * c));
        rhs.dp_dt[i] = force;
    }
    return rhs;
}

Vec velocity_from_momentum(const BackgroundFields& f, const Vec& x, const Vec& p3, double c) {
    validate(f);
    const auto n = f.metric.dim - 1;
    if (x.size() != f.metric.dim || p3.size() != n) {
        throw Error(ErrorKind::invalid_dimension, "momentum inversion: size mismatch");
    }
    const Mat g = f.metric.eval(x);
    const Mat S = g.bottomRightCorner(n, n);
    const SpatialSquare sq = spatial_square(g, p3);
    const double gam = gamma_on_shell(f, -g(0, 0), sq.value, c);

    double off = 0.0, diag = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        diag = std::max(diag, std::abs(S(i, i)));
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) off = std::max(off, std::abs(S(i, j)));
        }
    }
    if (off <= 1e-14 * std::max(diag, 1.0)) {
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = p3[i] / (S(i, i) * f.m * gam);
        return v;
    }

    // Non-diagonal spatial block: damp p_i = m gamma(v) g_ij v^j into a fixed
    // point, seeded with the on-shell gamma (which already solves it; the loop
    // verifies self-consistency against the metric evaluation).
    Vec v = sq.raised / (f.m * gam);
    for (int iter = 0; iter < 50; ++iter) {
        const Vec next = sq.raised / (f.m * gamma_factor(f, x, v, c));
        const double shift = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (shift < 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff())) return v;
    }
    throw Error(ErrorKind::integration_diverged, "momentum inversion fixed point did not converge");
}

double energy_h(const BackgroundFields& f, const Vec& x, const Vec& v3, double c) {
    const double gam = gamma_factor(f, x, v3, c);
    const double a0 = f.A ? potential_at(f, x)[0] : 0.0;
    return -f.q_charge * c * a0 + f.m * gam * c * c * g00_positive(f, x);
}

double energy_h_momentum(const BackgroundFields& f, const Vec& x, const Vec& pi3, double c) {
    validate(f);
    const auto n = f.metric.dim - 1;
    const Mat g = f.metric.eval(x);
    const Vec a = potential_at(f, x);
    const Vec p3 = pi3 - f.q_charge * a.tail(n);
    const SpatialSquare sq = spatial_square(g, p3);
    const double gam = gamma_on_shell(f, -g(0, 0), sq.value, c);
    return sq.value / (f.m * gam) - f.q_charge * c * a[0] + f.m * c * c / gam;
}

double energy_h_momentum(const BackgroundFields& f, const Vec& x, const Vec& pi3, double p0,
                         double c) {
    validate(f);
    const auto n = f.metric.dim - 1;
    const Mat g = f.metric.eval(x);
    const Vec a = potential_at(f, x);
    const Vec p3 = pi3 - f.q_charge * a.tail(n);
    const SpatialSquare sq = spatial_square(g, p3);
    if (p0 == 0.0) {
        throw Error(ErrorKind::off_shell_state, "temporal momentum p0 vanishes");
    }
    const double radicand = -g(0, 0) - sq.value / (p0 * p0);
    if (radicand <= 0.0) {
        throw Error(ErrorKind::off_shell_state,
                    "gamma not recoverable from the supplied (p0, p) pair");
    }
    const double gam = 1.0 / std::sqrt(radicand);
    return sq.value / (f.m * gam) - f.q_charge * c * a[0] + f.m * c * c / gam;
}

double mass_shell_residual(const BackgroundFields& f, const Vec& x, const Vec& p_cov, double c) {
    validate(f);
    const Mat g = f.metric.eval(x);
    Eigen::FullPivLU<Mat> lu(g);
    if (!lu.isInvertible()) {
        throw Error(ErrorKind::division_degenerate, "metric is singular at the probe point");
    }
    const Vec p_up = lu.solve(p_cov);
    return std::abs(p_cov.dot(p_up) + f.m * f.m * c * c);
}

ProperRhs proper_time_rhs_tilde(const BackgroundFields& f, const ExtendedState& s, double c,
                                ProperHVariant variant) {
    validate(f);
    const int d = f.metric.dim;
    if (s.x.size() != d || s.p.size() != d) {
        throw Error(ErrorKind::invalid_dimension, "proper-time rhs: state size mismatch");
    }
    const Vec a = potential_at(f, s.x);
    const Vec p = s.p - f.q_charge * a;  // kinematic covector
    const Mat g = f.metric.eval(s.x);
    Eigen::FullPivLU<Mat> lu(g);
    if (!lu.isInvertible()) {
        throw Error(ErrorKind::division_degenerate, "metric is singular along the flow");
    }
    const Vec u = lu.solve(p) / f.m;  // u^mu
    const double scale = variant == ProperHVariant::halved ? 1.0 : 2.0;

    ProperRhs rhs;
    rhs.dx_dtau = scale * u;
    rhs.dpi_dtau = Vec(d);
    const Mat dA = potential_jacobian(f, s.x);
    for (Eigen::Index rho = 0; rho < d; ++rho) {
        const Mat dg = metric_derivative(f, s.x, rho);
        // q A_{mu,rho} u^mu + (m/2) g_{mu nu,rho} u^mu u^nu
        const double em = f.q_charge * dA.row(rho).dot(u);
        const double grav = 0.5 * f.m * u.dot(dg * u);
        rhs.dpi_dtau[rho] = scale * (em + grav);
    }
    (void)c;
    return rhs;
}

Trajectory integrate_coordinate_time(const BackgroundFields& f, double t0, const Vec& x3_0,
                                     const Vec& v3_0, const std::vector<double>& t_grid,
                                     double c) {
    validate(f);
    const int d = f.metric.dim;
    const auto n = d - 1;
    if (x3_0.size() != n || v3_0.size() != n) {
        throw Error(ErrorKind::invalid_dimension, "coordinate-time integration: size mismatch");
    }

    Vec x0(d);
    x0[0] = c * t0;
    x0.tail(n) = x3_0;
    if (f.U && weak_field_consistency(f, {x0}, c) > 1e-12) {
        throw Error(ErrorKind::constraint_violation,
                    "metric clock factor disagrees with the declared weak-field potential");
    }

    const Mat g0 = f.metric.eval(x0);
    const double gam0 = gamma_factor(f, x0, v3_0, c);
    Vec y0(2 * n);
    y0.head(n) = x3_0;
    y0.tail(n) = f.m * gam0 * (g0.bottomRightCorner(n, n) * v3_0);

    auto rhs = [&](double t, const Vec& y) {
        Vec x(d);
        x[0] = c * t;
        x.tail(n) = y.head(n);
        const Vec v = velocity_from_momentum(f, x, y.tail(n), c);
        const CoordinateRhs r = coordinate_time_rhs(f, t, y.head(n), v, c);
        Vec dy(2 * n);
        dy.head(n) = r.dx_dt;
        dy.tail(n) = r.dp_dt;
        return dy;
    };

    Trajectory traj;
    traj.kind = TrajectoryKind::phase;
    numeric::rk4(rhs, y0, t_grid, [&](int, double t, const Vec& y) {
        Vec x(d);
        x[0] = c * t;
        x.tail(n) = y.head(n);
        const Vec v = velocity_from_momentum(f, x, y.tail(n), c);
        const double gam = gamma_factor(f, x, v, c);
        Vec p_up(d);
        p_up[0] = f.m * gam * c;
        p_up.tail(n) = f.m * gam * v;
        traj.samples.push_back({t, x, p_up, energy_h(f, x, v, c)});
    });
    return traj;
}

Trajectory integrate_proper_time(const BackgroundFields& f, const ExtendedState& s0,
                                 const std::vector<double>& tau_grid, double c,
                                 ProperHVariant variant) {
    validate(f);
    const int d = f.metric.dim;
    if (s0.x.size() != d || s0.p.size() != d) {
        throw Error(ErrorKind::invalid_dimension, "proper-time integration: state size mismatch");
    }

    Vec y0(2 * d);
    y0.head(d) = s0.x;
    y0.tail(d) = s0.p;

    auto rhs = [&](double tau, const Vec& y) {
        ExtendedState s{y.head(d), y.tail(d), tau};
        const ProperRhs r = proper_time_rhs_tilde(f, s, c, variant);
        Vec dy(2 * d);
        dy.head(d) = r.dx_dtau;
        dy.tail(d) = r.dpi_dtau;
        return dy;
    };

    Trajectory traj;
    traj.kind = TrajectoryKind::phase;
    numeric::rk4(rhs, y0, tau_grid, [&](int, double tau, const Vec& y) {
        const Vec x = y.head(d);
        const Vec pi = y.tail(d);
        const Vec p_kin = pi - f.q_charge * potential_at(f, x);
        traj.samples.push_back({tau, x, pi, mass_shell_residual(f, x, p_kin, c)});
    });
    return traj;
}

double comoving_consistency(const BackgroundFields& f, const std::vector<Vec>& probes, double c) {
    validate(f);
    double worst = 0.0;
    for (const Vec& x : probes) {
        const Mat dA = potential_jacobian(f, x);
        for (Eigen::Index rho = 0; rho < x.size(); ++rho) {
            const Mat dg = metric_derivative(f, x, rho);
            const double lhs = f.q_charge * dA(0, rho);      // q A_{rho,0}
            const double rhs = f.q_charge * dA(rho, 0)       // q A_{0,rho}
                               + 0.5 * f.m * c * dg(0, 0);   // (mc/2) g_{00,rho}
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

ExtHamiltonian make_rel_coordinate_H(const BackgroundFields& f, double c) {
    validate(f);
    const int d = f.metric.dim;
    ExtHamiltonian H;
    H.dim = d;
    H.label = HLabel::coordinate_time;
    H.eval = [f, c, d](const ExtendedState& s) {
        return energy_h_momentum(f, s.x, Vec(s.p.tail(d - 1)), c) + c * s.p[0];
    };
    // The p0 slot enters only through the exactly linear +c p0 term; the
    // remaining slots fall back on central differences of the energy.
    H.exact_grad = [f, c, d](const ExtendedState& s) {
        auto h = [&](const Vec& x, const Vec& p) {
            return energy_h_momentum(f, x, Vec(p.tail(d - 1)), c);
        };
        PhaseGradient out;
        out.dx = Vec(d);
        out.dp = Vec(d);
        for (Eigen::Index mu = 0; mu < d; ++mu) {
            const double hx = field_step(f, s.x[mu]);
            Vec xp = s.x, xm = s.x;
            xp[mu] += hx;
            xm[mu] -= hx;
            out.dx[mu] = (h(xp, s.p) - h(xm, s.p)) / (2.0 * hx);
            if (mu == 0) {
                out.dp[0] = c;
                continue;
            }
            const double hp = numeric::fd_step(s.p[mu]);
            Vec pp = s.p, pm = s.p;
            pp[mu] += hp;
            pm[mu] -= hp;
            out.dp[mu] = (h(s.x, pp) - h(s.x, pm)) / (2.0 * hp);
        }
        return out;
    };
    return H;
}

ExtHamiltonian make_rel_proper_H(const BackgroundFields& f, double c) {
    validate(f);
    const int d = f.metric.dim;
    ExtHamiltonian H;
    H.dim = d;
    H.label = HLabel::proper_time;
    // Uncharged form: the canonical momentum is the kinematic one.  gamma is
    // recovered from the momenta alone, with the time index raised against
    // the asymptotic -1 so (p^0)^2 = p0^2.
    H.eval = [f, c, d](const ExtendedState& s) {
        const Mat g = f.metric.eval(s.x);
        const SpatialSquare sq = spatial_square(g, Vec(s.p.tail(d - 1)));
        if (s.p[0] == 0.0) {
            throw Error(ErrorKind::division_degenerate, "temporal momentum p0 vanishes");
        }
        const double radicand = -g(0, 0) - sq.value / (s.p[0] * s.p[0]);
        if (radicand <= 0.0) {
            throw Error(ErrorKind::off_shell_state,
                        "gamma not recoverable from the supplied momenta");
        }
        const double gam = 1.0 / std::sqrt(radicand);
        return sq.value / (2.0 * f.m) + f.m * c * c + s.p[0] * c * gam;
    };
    return H;
}

Metric make_weak_field_metric(const std::function<double(const Vec&)>& U, int dim, double c) {
    if (dim < 2) {
        throw Error(ErrorKind::invalid_dimension, "weak-field metric needs time plus space");
    }
    Metric m;
    m.dim = dim;
    m.signature.assign(dim, +1);
    m.signature[0] = -1;
    m.eval = [U, c, dim](const Vec& x) {
        Mat g = Mat::Identity(dim, dim);
        g(0, 0) = -(1.0 - 2.0 * U(x) / (c * c));
        return g;
    };
    return m;
}

}  // namespace rimech
