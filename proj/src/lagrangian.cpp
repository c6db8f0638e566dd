#include "rimech/lagrangian.hpp"

#include <cmath>

#include "rimech/errors.hpp"

namespace rimech {

namespace {

void check_probe(const LagrangianSpec& L, const Vec& x, const Vec& v) {
    if (x.size() != L.dim || v.size() != L.dim)
        throw Error(ErrorKind::invalid_dimension,
                    "probe dimension does not match Lagrangian dim " + std::to_string(L.dim));
}

}  // namespace

Vec canonical_momentum(const LagrangianSpec& L, const Vec& x, const Vec& v) {
    check_probe(L, x, v);
    Vec p;
    if (L.exact_dv) {
        p = L.exact_dv(x, v);
    } else {
        p = numeric::gradient([&](const Vec& vv) { return L.eval(x, vv); }, v);
    }
    if (!numeric::all_finite(p))
        throw Error(ErrorKind::derivative_failure, "canonical momentum is not finite");
    return p;
}

Vec position_gradient(const LagrangianSpec& L, const Vec& x, const Vec& v) {
    check_probe(L, x, v);
    Vec g;
    if (L.exact_dx) {
        g = L.exact_dx(x, v);
    } else {
        g = numeric::gradient([&](const Vec& xx) { return L.eval(xx, v); }, x);
    }
    if (!numeric::all_finite(g))
        throw Error(ErrorKind::derivative_failure, "position gradient is not finite");
    return g;
}

double homogeneity_degree(const LagrangianSpec& L, const Vec& x, const Vec& v, double tol) {
    check_probe(L, x, v);
    const double value = L.eval(x, v);
    if (std::abs(value) < tol)
        throw Error(ErrorKind::degenerate_probe,
                    "|L| below tolerance; degree undefined at a zero of L");
    return canonical_momentum(L, x, v).dot(v) / value;
}

double hamiltonian_function(const LagrangianSpec& L, const Vec& x, const Vec& v) {
    check_probe(L, x, v);
    return canonical_momentum(L, x, v).dot(v) - L.eval(x, v);
}

HessianReport analyze_velocity_hessian(const LagrangianSpec& L, const Vec& x, const Vec& v,
                                       double threshold) {
    check_probe(L, x, v);
    HessianReport r;
    if (L.exact_dv) {
        // Differentiate the exact momentum once instead of nesting two
        // numeric differences.
        const int n = L.dim;
        r.hessian.resize(n, n);
        Vec probe = v;
        for (int j = 0; j < n; ++j) {
            const double h = numeric::fd_step(v[j]);
            probe[j] = v[j] + h;
            const Vec hi = L.exact_dv(x, probe);
            probe[j] = v[j] - h;
            const Vec lo = L.exact_dv(x, probe);
            probe[j] = v[j];
            r.hessian.col(j) = (hi - lo) / (2.0 * h);
        }
        r.hessian = 0.5 * (r.hessian + r.hessian.transpose().eval());
    } else {
        r.hessian = numeric::hessian([&](const Vec& vv) { return L.eval(x, vv); }, v);
    }
    if (!r.hessian.allFinite())
        throw Error(ErrorKind::derivative_failure, "velocity Hessian is not finite");

    r.det = r.hessian.determinant();

    // A row counts as dead when it sits at the differencing noise floor, which
    // must be judged against the matrix's and the Lagrangian's own magnitude:
    // the Hessian of a first-order homogeneous L is exactly zero on paper but
    // comes back from the finite differences as ~1e-11 noise.
    const double matrix_scale = r.hessian.cwiseAbs().maxCoeff();
    const Vec p = canonical_momentum(L, x, v);
    const double value_scale =
        (std::abs(L.eval(x, v)) + std::abs(p.dot(v))) / (1.0 + v.squaredNorm());
    const double row_floor = 1e-8 * (matrix_scale + value_scale);

    Mat scaled = r.hessian;
    bool dead_row = false;
    for (int i = 0; i < scaled.rows(); ++i) {
        const double m = scaled.row(i).cwiseAbs().maxCoeff();
        if (m <= row_floor) {
            dead_row = true;
            continue;
        }
        scaled.row(i) /= m;
    }
    r.normalized_det = dead_row ? 0.0 : scaled.determinant();
    r.singular = std::abs(r.normalized_det) < threshold;
    return r;
}

double hessian_determinant(const LagrangianSpec& L, const Vec& x, const Vec& v) {
    return analyze_velocity_hessian(L, x, v).det;
}

double el_residual(const LagrangianSpec& L, const Trajectory& traj) {
    if (traj.size() < 3)
        throw Error(ErrorKind::invalid_dimension, "need at least 3 samples for an EL residual");

    const std::size_t n = traj.size();
    std::vector<Vec> momenta(n);
    for (std::size_t i = 0; i < n; ++i)
        momenta[i] = canonical_momentum(L, traj[i].x, traj[i].aux);

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dl = traj[i + 1].lambda - traj[i - 1].lambda;
        const Vec dpdl = (momenta[i + 1] - momenta[i - 1]) / dl;
        const Vec force = position_gradient(L, traj[i].x, traj[i].aux);
        worst = std::max(worst, (dpdl - force).cwiseAbs().maxCoeff());
    }
    return worst;
}

EquivalenceReport check_composed_equivalence(const LagrangianSpec& L,
                                             const std::function<double(double)>& f,
                                             const Trajectory& traj, double residual_tol,
                                             double drift_tol) {
    if (traj.size() < 3)
        throw Error(ErrorKind::invalid_dimension, "need at least 3 samples");

    const std::size_t n = traj.size();
    std::vector<double> lvals(n);
    std::vector<double> fprime(n);
    std::vector<Vec> momenta(n);
    for (std::size_t i = 0; i < n; ++i) {
        lvals[i] = L.eval(traj[i].x, traj[i].aux);
        fprime[i] = numeric::central_diff(f, lvals[i], numeric::fd_step(lvals[i]));
        momenta[i] = fprime[i] * canonical_momentum(L, traj[i].x, traj[i].aux);
    }

    EquivalenceReport rep;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dl = traj[i + 1].lambda - traj[i - 1].lambda;
        rep.lagrangian_drift =
            std::max(rep.lagrangian_drift, std::abs((lvals[i + 1] - lvals[i - 1]) / dl));
    }
    if (rep.lagrangian_drift > drift_tol)
        throw Error(ErrorKind::not_applicable,
                    "dL/dlambda = " + std::to_string(rep.lagrangian_drift) +
                        " is not conserved along the trajectory; equivalence assumes dL/dlambda = 0");

    // EL residual of f(L): d/dlambda [f'(L) p] - f'(L) dL/dx.
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dl = traj[i + 1].lambda - traj[i - 1].lambda;
        const Vec dmu = (momenta[i + 1] - momenta[i - 1]) / dl;
        const Vec force = fprime[i] * position_gradient(L, traj[i].x, traj[i].aux);
        rep.max_residual = std::max(rep.max_residual, (dmu - force).cwiseAbs().maxCoeff());
    }
    rep.equivalent = rep.max_residual < residual_tol;
    return rep;
}

}  // namespace rimech
