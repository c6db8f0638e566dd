#pragma once

#include <functional>
#include <optional>

#include "rimech/metric.hpp"
#include "rimech/numeric.hpp"

namespace rimech {

// A Lagrangian L(x, v) with optional exact first derivatives.  When the exact
// callbacks are absent, derivatives fall back to central finite differences
// with per-component step scaling.
struct LagrangianSpec {
    int dim = 0;
    std::function<double(const Vec& x, const Vec& v)> eval;
    std::function<Vec(const Vec& x, const Vec& v)> exact_dv;  // optional
    std::function<Vec(const Vec& x, const Vec& v)> exact_dx;  // optional
    bool time_dependent = false;

    double operator()(const Vec& x, const Vec& v) const { return eval(x, v); }
};

// p_a = dL/dv^a.
Vec canonical_momentum(const LagrangianSpec& L, const Vec& x, const Vec& v);

// dL/dx^a (exact if supplied, else central differences).
Vec position_gradient(const LagrangianSpec& L, const Vec& x, const Vec& v);

// Euler degree (v . dL/dv) / L.  Homogeneous Lagrangians of order n return n
// independently of the probe.  Refuses probes with |L| < tol instead of
// regularizing the division.
double homogeneity_degree(const LagrangianSpec& L, const Vec& x, const Vec& v,
                          double tol = 1e-12);

// H(x, v) = p.v - L.  Identically zero for first-order homogeneous L.
double hamiltonian_function(const LagrangianSpec& L, const Vec& x, const Vec& v);

// Velocity Hessian d2L/dv^a dv^b and its singularity analysis.  The singular
// flag is decided on the determinant after each row is normalized by its
// largest magnitude, so the judgement is scale-free; rows at the differencing
// noise floor (relative to the matrix and Lagrangian magnitudes) count as
// zero rows.
struct HessianReport {
    Mat hessian;
    double det = 0.0;
    double normalized_det = 0.0;
    bool singular = false;
};

HessianReport analyze_velocity_hessian(const LagrangianSpec& L, const Vec& x, const Vec& v,
                                       double threshold = 1e-6);
double hessian_determinant(const LagrangianSpec& L, const Vec& x, const Vec& v);

// Does replacing L by f(L) leave the Euler-Lagrange equations satisfied along
// traj?  True for conserved-L trajectories: the extra EL term of a composed
// Lagrangian is proportional to dL/dlambda.  The report carries the max EL
// residual of f(L) over interior samples and the measured dL/dlambda drift.
// Throws not-applicable when the drift exceeds drift_tol, since the
// equivalence statement assumes a conserved Lagrangian.
struct EquivalenceReport {
    double max_residual = 0.0;
    double lagrangian_drift = 0.0;
    bool equivalent = false;
};

EquivalenceReport check_composed_equivalence(const LagrangianSpec& L,
                                             const std::function<double(double)>& f,
                                             const Trajectory& traj,
                                             double residual_tol = 1e-7,
                                             double drift_tol = 1e-6);

// Max-norm EL residual of L itself along a sampled trajectory; the building
// block of check_composed_equivalence, exposed for direct solution checks.
double el_residual(const LagrangianSpec& L, const Trajectory& traj);

}  // namespace rimech
