#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace rimech {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Natural constants used throughout.  Defaults are geometric units; scenarios
// may override them wholesale.
struct Constants {
    double c = 1.0;
    double hbar = 1.0;
};

namespace numeric {

// Step sizes for one-sided scalar probes.  First derivatives use the cube
// root of machine epsilon, second derivatives the fourth root; both are
// scaled by the magnitude of the coordinate being varied so that probes stay
// meaningful far from the origin.
double fd_step(double scale);
double fd_step2(double scale);

double central_diff(const std::function<double(double)>& f, double x, double h);

// Gradient of a scalar function of a vector, one central difference per
// component.  Throws derivative_failure if any probe comes back non-finite.
Vec gradient(const std::function<double(const Vec&)>& f, const Vec& x);

// Symmetric second-derivative matrix via the nested four-point stencil.
Mat hessian(const std::function<double(const Vec&)>& f, const Vec& x);

// Composite trapezoid over an arbitrary monotone grid.
double trapezoid(const std::vector<double>& xs, const std::vector<double>& ys);

// Running integral: out[i] = integral from xs[0] to xs[i], trapezoid rule.
std::vector<double> cumulative_trapezoid(const std::vector<double>& xs,
                                         const std::vector<double>& ys);

// Uniform grid of n points covering [a, b] inclusive (n >= 2).
std::vector<double> linspace(double a, double b, int n);

// Classic fixed-step fourth-order Runge-Kutta over an explicit grid.  The
// grid must be strictly monotone but may run in either direction and need
// not be uniform.  The observer sees every accepted sample, including the
// initial one.  Throws integration_diverged when the state stops being
// finite or its norm explodes.
void rk4(const std::function<Vec(double, const Vec&)>& rhs, const Vec& y0,
         const std::vector<double>& grid,
         const std::function<void(int, double, const Vec&)>& observer);

bool all_finite(const Vec& v);

}  // namespace numeric
}  // namespace rimech
