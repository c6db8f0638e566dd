#include "rimech/quantize1d.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "rimech/errors.hpp"

namespace rimech {
namespace {

constexpr std::complex<double> kI{0.0, 1.0};

double uniform_spacing(const Vec& grid) {
    const auto n = grid.size();
    if (n < 2) {
        throw Error(ErrorKind::grid_too_coarse, "wave grid needs at least two samples");
    }
    const double h = (grid[n - 1] - grid[0]) / static_cast<double>(n - 1);
    if (!(h > 0.0)) {
        throw Error(ErrorKind::grid_too_coarse, "wave grid must ascend");
    }
    // Relative to the grid magnitude, so that rounding in x0 + k*h far from
    // the origin does not read as non-uniformity.
    const double scale = std::max({std::abs(grid[0]), std::abs(grid[n - 1]), h});
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (std::abs(grid[i + 1] - grid[i] - h) > 1e-12 * scale) {
            throw Error(ErrorKind::grid_too_coarse, "wave grid is not uniform");
        }
    }
    return h;
}

std::vector<double> sample_positive(const PhiField& phi, const std::vector<double>& grid) {
    if (!phi.eval) {
        throw Error(ErrorKind::constraint_violation, "phi field has no evaluator");
    }
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out[k] = phi.eval(grid[k]);
        if (!std::isfinite(out[k]) || out[k] <= 0.0) {
            throw Error(ErrorKind::constraint_violation, "phi must stay finite and positive");
        }
    }
    return out;
}

// Phase resolution gate: more than one twentieth of a radian per step means
// the sampled wave can alias and every downstream check silently degrades.
void check_resolution(double h, double hbar, double max_phi) {
    if (h > hbar / (20.0 * max_phi)) {
        throw Error(ErrorKind::grid_too_coarse,
                    "grid step " + std::to_string(h) + " exceeds hbar/(20 max phi) = " +
                        std::to_string(hbar / (20.0 * max_phi)));
    }
}

WaveFunction synth(const PhiField& phi, const std::vector<double>& grid, double hbar, double N,
                   double phase_sign, bool sqrt_amplitude, VarKind kind) {
    if (!(N > 0.0)) {
        throw Error(ErrorKind::constraint_violation, "normalization factor must be positive");
    }
    if (!(hbar > 0.0)) {
        throw Error(ErrorKind::constraint_violation, "hbar must be positive");
    }
    const std::vector<double> values = sample_positive(phi, grid);

    WaveFunction psi;
    psi.grid = Eigen::Map<const Vec>(grid.data(), static_cast<Eigen::Index>(grid.size()));
    psi.hbar = hbar;
    psi.var_kind = kind;

    const double h = uniform_spacing(psi.grid);
    check_resolution(h, hbar, *std::max_element(values.begin(), values.end()));

    const std::vector<double> phase = numeric::cumulative_trapezoid(grid, values);
    psi.values.resize(psi.grid.size());
    for (Eigen::Index k = 0; k < psi.grid.size(); ++k) {
        const auto ku = static_cast<std::size_t>(k);
        std::complex<double> v = std::exp(phase_sign * kI * phase[ku] / hbar) / N;
        if (sqrt_amplitude) v *= std::sqrt(values[ku]);
        psi.values[k] = v;
    }
    return psi;
}

}  // namespace

double grid_spacing(const WaveFunction& psi) {
    const double h = uniform_spacing(psi.grid);
    if (!psi.values.allFinite()) {
        throw Error(ErrorKind::constraint_violation, "wave values are not finite");
    }
    return h;
}

WaveFunction synth_psi_coordinate(const PhiField& phi, const std::vector<double>& grid,
                                  double hbar, double N) {
    return synth(phi, grid, hbar, N, -1.0, false, VarKind::time);
}

WaveFunction synth_psi_proper(const PhiField& phi, const std::vector<double>& grid, double hbar,
                              double N) {
    return synth(phi, grid, hbar, N, -1.0, true, VarKind::time);
}

WaveFunction synth_psi_spatial(const PhiField& phi, const std::vector<double>& grid, double hbar,
                               double N, SpatialGauge gauge) {
    return synth(phi, grid, hbar, N, +1.0, gauge == SpatialGauge::proper_length, VarKind::space);
}

std::complex<double> inner_product_windowed(const WaveFunction& a, const WaveFunction& b,
                                            double t0, double Delta) {
    if (a.var_kind != b.var_kind) {
        throw Error(ErrorKind::kind_mismatch, "inner product needs waves over the same variable");
    }
    const double h = grid_spacing(a);
    (void)grid_spacing(b);
    if (a.grid.size() != b.grid.size() ||
        (a.grid - b.grid).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h)) {
        throw Error(ErrorKind::kind_mismatch, "inner product needs waves on a shared grid");
    }
    if (!(Delta > 0.0)) {
        throw Error(ErrorKind::window_out_of_range, "window width must be positive");
    }
    const double lo = a.grid[0];
    const double hi = a.grid[a.grid.size() - 1];
    const double t1 = t0 + Delta;
    const double slack = 1e-9 * h;
    if (t0 < lo - slack || t1 > hi + slack) {
        throw Error(ErrorKind::window_out_of_range, "window extends beyond the sampled grid");
    }

    auto integrand = [&](Eigen::Index k) { return std::conj(a.values[k]) * b.values[k]; };
    auto at = [&](double t) {
        // Linear interpolation of the integrand into a fractional cell.
        const double u = std::clamp((t - lo) / h, 0.0, static_cast<double>(a.grid.size() - 1));
        const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), a.grid.size() - 2);
        const double w = u - static_cast<double>(k);
        return (1.0 - w) * integrand(k) + w * integrand(k + 1);
    };

    const auto first = static_cast<Eigen::Index>(std::ceil((t0 - lo) / h - 1e-9));
    const auto last = static_cast<Eigen::Index>(std::floor((t1 - lo) / h + 1e-9));
    if (first > last) {
        // Window lies inside a single cell.
        return 0.5 * (t1 - t0) * (at(t0) + at(t1)) / Delta;
    }
    std::complex<double> acc = 0.0;
    for (Eigen::Index k = std::max<Eigen::Index>(first, 0); k < std::min(last, a.grid.size() - 1);
         ++k) {
        acc += 0.5 * h * (integrand(k) + integrand(k + 1));
    }
    const double left_edge = lo + static_cast<double>(std::max<Eigen::Index>(first, 0)) * h;
    if (left_edge > t0) {
        acc += 0.5 * (left_edge - t0) * (at(t0) + at(left_edge));
    }
    const double right_edge = lo + static_cast<double>(last) * h;
    if (t1 > right_edge) {
        acc += 0.5 * (t1 - right_edge) * (at(right_edge) + at(t1));
    }
    return acc / Delta;
}

namespace {

WaveFunction derivative_times(const WaveFunction& psi, std::complex<double> factor) {
    const double h = grid_spacing(psi);
    const auto n = psi.grid.size();
    WaveFunction out = psi;
    if (n < 3) {
        throw Error(ErrorKind::grid_too_coarse, "derivative needs at least three samples");
    }
    out.values[0] = factor * (psi.values[1] - psi.values[0]) / h;
    out.values[n - 1] = factor * (psi.values[n - 1] - psi.values[n - 2]) / h;
    for (Eigen::Index k = 1; k + 1 < n; ++k) {
        out.values[k] = factor * (psi.values[k + 1] - psi.values[k - 1]) / (2.0 * h);
    }
    return out;
}

}  // namespace

WaveFunction apply_p0(const WaveFunction& psi) {
    if (psi.var_kind != VarKind::time) {
        throw Error(ErrorKind::kind_mismatch, "p0 acts on time-sampled waves");
    }
    return derivative_times(psi, kI * psi.hbar);
}

WaveFunction apply_p1(const WaveFunction& psi) {
    if (psi.var_kind != VarKind::space) {
        throw Error(ErrorKind::kind_mismatch, "p1 acts on space-sampled waves");
    }
    return derivative_times(psi, -kI * psi.hbar);
}

double running_average(const PhiField& phi, double Delta, int n_samples) {
    if (!(Delta > 0.0)) {
        throw Error(ErrorKind::window_out_of_range, "observation window must be positive");
    }
    if (n_samples < 2) {
        throw Error(ErrorKind::grid_too_coarse, "running average needs at least two samples");
    }
    const std::vector<double> xs = numeric::linspace(0.0, Delta, n_samples);
    const std::vector<double> ys = sample_positive(phi, xs);
    return numeric::trapezoid(xs, ys) / Delta;
}

std::complex<double> energy_shift_weak_gravity(const BackgroundFields& fields,
                                               const WaveFunction& psi, double t, double c) {
    if (psi.var_kind != VarKind::time) {
        throw Error(ErrorKind::kind_mismatch, "energy shift is evaluated on time-sampled waves");
    }
    const double h = grid_spacing(psi);
    const auto n = psi.grid.size();
    if (n < 3) {
        throw Error(ErrorKind::grid_too_coarse, "energy shift needs at least three samples");
    }
    if (t < psi.grid[0] - 1e-9 * h || t > psi.grid[n - 1] + 1e-9 * h) {
        throw Error(ErrorKind::window_out_of_range, "requested time is outside the sampled wave");
    }
    auto k = static_cast<Eigen::Index>(std::lround((t - psi.grid[0]) / h));
    k = std::clamp<Eigen::Index>(k, 1, n - 2);

    const std::complex<double> value = psi.values[k];
    if (std::abs(value) < 1e-12 * psi.values.cwiseAbs().maxCoeff()) {
        throw Error(ErrorKind::division_degenerate, "wave vanishes at the requested time");
    }
    const std::complex<double> slope = (psi.values[k + 1] - psi.values[k - 1]) / (2.0 * h);

    Vec x = Vec::Zero(fields.metric.dim);
    x[0] = c * psi.grid[k];
    const double g00p = g00_positive(fields, x);
    if (g00p <= 0.0) {
        throw Error(ErrorKind::superluminal_state, "clock factor is not positive at this time");
    }
    const double gamma = 1.0 / std::sqrt(g00p);
    return kI * psi.hbar * gamma * slope / value;
}

}  // namespace rimech
