#include "rimech/numeric.hpp"

#include <cmath>
#include <limits>

#include "rimech/errors.hpp"

namespace rimech {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::invalid_dimension: return "invalid-dimension";
        case ErrorKind::derivative_failure: return "derivative-failure";
        case ErrorKind::degenerate_probe: return "degenerate-probe";
        case ErrorKind::underdetermined_system: return "underdetermined-system";
        case ErrorKind::integration_diverged: return "integration-diverged";
        case ErrorKind::gauge_degenerate: return "gauge-degenerate";
        case ErrorKind::space_like_segment: return "space-like-segment";
        case ErrorKind::not_applicable: return "not-applicable";
        case ErrorKind::constraint_violation: return "constraint-violation";
        case ErrorKind::not_an_integral: return "not-an-integral";
        case ErrorKind::superluminal_state: return "superluminal-state";
        case ErrorKind::off_shell_state: return "off-shell-state";
        case ErrorKind::division_degenerate: return "division-degenerate";
        case ErrorKind::kind_mismatch: return "kind-mismatch";
        case ErrorKind::window_out_of_range: return "window-out-of-range";
        case ErrorKind::grid_too_coarse: return "grid-too-coarse";
        case ErrorKind::parse_error: return "parse-error";
        case ErrorKind::schema_error: return "schema-error";
    }
    return "unknown-error";
}

namespace numeric {

namespace {
const double kEps = std::numeric_limits<double>::epsilon();
const double kStep1 = std::cbrt(kEps);       // ~6.06e-6
const double kStep2 = std::sqrt(kStep1);     // second-derivative stencils
}  // namespace

double fd_step(double scale) { return kStep1 * std::max(1.0, std::abs(scale)); }
double fd_step2(double scale) { return kStep2 * std::max(1.0, std::abs(scale)); }

double central_diff(const std::function<double(double)>& f, double x, double h) {
    const double hi = f(x + h);
    const double lo = f(x - h);
    if (!std::isfinite(hi) || !std::isfinite(lo))
        throw Error(ErrorKind::derivative_failure, "non-finite probe in central difference");
    return (hi - lo) / (2.0 * h);
}

Vec gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
    Vec g(x.size());
    Vec probe = x;
    for (int i = 0; i < x.size(); ++i) {
        const double h = fd_step(x[i]);
        probe[i] = x[i] + h;
        const double hi = f(probe);
        probe[i] = x[i] - h;
        const double lo = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(hi) || !std::isfinite(lo))
            throw Error(ErrorKind::derivative_failure,
                        "non-finite probe in gradient component " + std::to_string(i));
        g[i] = (hi - lo) / (2.0 * h);
    }
    return g;
}

Mat hessian(const std::function<double(const Vec&)>& f, const Vec& x) {
    const int n = static_cast<int>(x.size());
    Mat h(n, n);
    Vec probe = x;
    std::vector<double> steps(n);
    for (int i = 0; i < n; ++i) steps[i] = fd_step2(x[i]);

    const double f0 = f(x);
    if (!std::isfinite(f0))
        throw Error(ErrorKind::derivative_failure, "non-finite value at expansion point");

    for (int i = 0; i < n; ++i) {
        probe[i] = x[i] + steps[i];
        const double fp = f(probe);
        probe[i] = x[i] - steps[i];
        const double fm = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw Error(ErrorKind::derivative_failure, "non-finite diagonal probe");
        h(i, i) = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
        for (int j = i + 1; j < n; ++j) {
            probe[i] = x[i] + steps[i];
            probe[j] = x[j] + steps[j];
            const double fpp = f(probe);
            probe[j] = x[j] - steps[j];
            const double fpm = f(probe);
            probe[i] = x[i] - steps[i];
            const double fmm = f(probe);
            probe[j] = x[j] + steps[j];
            const double fmp = f(probe);
            probe[i] = x[i];
            probe[j] = x[j];
            if (!std::isfinite(fpp) || !std::isfinite(fpm) || !std::isfinite(fmm) ||
                !std::isfinite(fmp))
                throw Error(ErrorKind::derivative_failure, "non-finite mixed probe");
            h(i, j) = h(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * steps[i] * steps[j]);
        }
    }
    return h;
}

double trapezoid(const std::vector<double>& xs, const std::vector<double>& ys) {
    double acc = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        acc += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    return acc;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& xs,
                                         const std::vector<double>& ys) {
    std::vector<double> out(xs.size(), 0.0);
    for (std::size_t i = 1; i < xs.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    return out;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        xs[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / (n - 1);
    return xs;
}

void rk4(const std::function<Vec(double, const Vec&)>& rhs, const Vec& y0,
         const std::vector<double>& grid,
         const std::function<void(int, double, const Vec&)>& observer) {
    if (grid.size() < 2)
        throw Error(ErrorKind::invalid_dimension, "integration grid needs at least two points");

    const double blowup = 1e12 * std::max(1.0, y0.norm());
    Vec y = y0;
    observer(0, grid[0], y);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double t = grid[i - 1];
        const double h = grid[i] - t;
        const Vec k1 = rhs(t, y);
        const Vec k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1);
        const Vec k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2);
        const Vec k4 = rhs(t + h, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!all_finite(y) || y.norm() > blowup)
            throw Error(ErrorKind::integration_diverged,
                        "state blew up at parameter " + std::to_string(grid[i]));
        observer(static_cast<int>(i), grid[i], y);
    }
}

bool all_finite(const Vec& v) {
    for (int i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

}  // namespace numeric
}  // namespace rimech
