#pragma once

#include <functional>
#include <vector>

#include "rimech/lagrangian.hpp"
#include "rimech/metric.hpp"

namespace rimech {

// How to close the Euler-Lagrange system when the velocity Hessian is
// singular.  First-order homogeneous Lagrangians leave one velocity direction
// undetermined (the parametrization); conserved_lagrangian pins it with
// dL/dlambda = 0, which in one dimension gives the explicit velocity
// equation dv/dlambda = -v^2 d(ln phi)/dq.
enum class GaugeClosure { none, conserved_lagrangian };

// Fixed-step RK4 solution of d/dlambda(dL/dv) = dL/dx over a strictly
// monotone grid.  Samples carry x, velocity (aux) and the running Lagrangian
// value (diag).  Throws underdetermined-system when the Hessian is singular
// and no closure applies, integration-diverged on blow-up.
Trajectory integrate_el(const LagrangianSpec& L, const Vec& x0, const Vec& v0,
                        const std::vector<double>& grid,
                        GaugeClosure closure = GaugeClosure::none);

// Relabel a trajectory by a new parameter xi with dxi/dlambda = rate(lambda).
// Positions are untouched, velocities pick up dlambda/dxi, the new parameter
// values come from a cumulative trapezoid of rate.  rate must keep one sign
// on the whole grid; a zero crossing is a degenerate gauge.
Trajectory reparametrize(const Trajectory& traj,
                         const std::function<double(double)>& rate);

// Cumulative proper time: integral of sqrt(g(v,v))/c dlambda with the
// radicand sign-adjusted for metrics stated in the one-minus-axis form.
// Null segments contribute zero; a segment with g(v,v) < -tol is space-like
// and rejected.
std::vector<double> proper_time_along(const Trajectory& traj, const Metric& m, double c,
                                      double tol = 1e-9);

// Trapezoid action integral of L along a sampled trajectory.
double action_integral(const LagrangianSpec& L, const Trajectory& traj);

// Transform a conserved-L trajectory of the one-dimensional system L = phi(q)v
// into a new gauge and re-evaluate the velocity equation
// d(1/v)/dlambda = d(ln phi)/dq there, with phi replaced by
// psi(q) = phi(q)/lambda'(q).  The mismatch between the two sides measures
// how well the equation keeps its form under reparametrization.  The report
// also carries the range of the new-gauge Lagrangian psi-free form
// phi(q) * w, which is constant exactly when the rate is the proper-length
// rate dl/dlambda = phi(q) v.
struct GaugeCheckReport {
    double max_mismatch = 0.0;
    double lagrangian_min = 0.0;
    double lagrangian_max = 0.0;
};

GaugeCheckReport gauge_invariance_check(const std::function<double(double)>& phi,
                                        const Trajectory& traj,
                                        const std::function<double(double)>& rate);

}  // namespace rimech
