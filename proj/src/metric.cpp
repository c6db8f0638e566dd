#include "rimech/metric.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rimech/errors.hpp"

namespace rimech {

Metric make_minkowski(int dim, SignatureOrder order) {
    if (dim < 1)
        throw Error(ErrorKind::invalid_dimension,
                    "metric dimension must be positive, got " + std::to_string(dim));
    Metric m;
    m.dim = dim;
    m.signature.assign(static_cast<std::size_t>(dim), order == SignatureOrder::plus_minus ? -1 : +1);
    m.signature[0] = order == SignatureOrder::plus_minus ? +1 : -1;
    Vec diag(dim);
    for (int i = 0; i < dim; ++i) diag[i] = m.signature[static_cast<std::size_t>(i)];
    Mat g = diag.asDiagonal();
    m.eval = [g](const Vec&) { return g; };
    return m;
}

namespace {
void check_dim(const Metric& m, const Vec& v, const char* what) {
    if (v.size() != m.dim)
        throw Error(ErrorKind::invalid_dimension,
                    std::string(what) + " has length " + std::to_string(v.size()) +
                        ", metric dimension is " + std::to_string(m.dim));
}
}  // namespace

double inner(const Metric& m, const Vec& x, const Vec& a, const Vec& b) {
    check_dim(m, x, "position");
    check_dim(m, a, "vector");
    check_dim(m, b, "vector");
    return a.dot(m.eval(x) * b);
}

double norm_squared(const Metric& m, const Vec& x, const Vec& v) { return inner(m, x, v, v); }

Vec lower_index(const Metric& m, const Vec& x, const Vec& v) {
    check_dim(m, x, "position");
    check_dim(m, v, "vector");
    return m.eval(x) * v;
}

Vec raise_index(const Metric& m, const Vec& x, const Vec& p) {
    check_dim(m, x, "position");
    check_dim(m, p, "covector");
    const Mat g = m.eval(x);
    Eigen::FullPivLU<Mat> lu(g);
    if (!lu.isInvertible())
        throw Error(ErrorKind::division_degenerate, "metric is singular at the given point");
    return lu.solve(p);
}

namespace {

// For a unit direction n in the non-clock coordinates, split the squared
// components into the spatial part and the extra-time part.  Along the ray
// v = (1, r n) the constraint g(v,v) >= 0 caps r^2 at 1/(s - t) if s > t,
// giving a spatial speed of s/(s - t); if s <= t the ray never leaves the
// cone and the speed grows without limit whenever s > 0.
struct RaySplit {
    double spatial = 0.0;
    double extra_time = 0.0;
};

RaySplit split(const std::vector<int>& rest_sign, const Vec& n) {
    RaySplit r;
    for (int i = 0; i < n.size(); ++i) {
        const double s2 = n[i] * n[i];
        if (rest_sign[static_cast<std::size_t>(i)] > 0)
            r.extra_time += s2;
        else
            r.spatial += s2;
    }
    return r;
}

constexpr double kTol = 1e-6;

// Value of the capped spatial speed squared along direction n, or infinity.
// Any ray carrying extra-time weight defeats a finite cap: the spare clock
// component can absorb arbitrarily much spatial speed, so such a direction
// reports unbounded even when its own spatial part vanishes.  This keeps
// every signature with a second time axis in the unbounded class.
double direction_value(const std::vector<int>& rest_sign, const Vec& n, bool* unbounded) {
    const RaySplit r = split(rest_sign, n);
    const double denom = r.spatial - r.extra_time;
    if (denom <= kTol) {
        *unbounded = true;
        return std::numeric_limits<double>::infinity();
    }
    return r.spatial / denom;
}

}  // namespace

SpeedBound max_spatial_speed(const std::vector<int>& signature) {
    if (signature.empty())
        throw Error(ErrorKind::invalid_dimension, "empty signature");
    for (int s : signature)
        if (s != 1 && s != -1)
            throw Error(ErrorKind::invalid_dimension, "signature entries must be +1 or -1");

    const int dim = static_cast<int>(signature.size());
    int first_plus = -1;
    for (int i = 0; i < dim; ++i)
        if (signature[static_cast<std::size_t>(i)] > 0) { first_plus = i; break; }

    SpeedBound out;
    if (first_plus < 0) {
        // All axes negative: g(v,v) = -|v|^2 < 0 for every nonzero v.  Confirm
        // by probing the unit sphere rather than trusting the sign count.
        std::mt19937_64 rng(20240817);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double best = -std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 256 * dim; ++trial) {
            Vec v(dim);
            for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
            if (v.norm() < 1e-12) continue;
            v.normalize();
            double q = 0.0;
            for (int i = 0; i < dim; ++i) q += signature[static_cast<std::size_t>(i)] * v[i] * v[i];
            best = std::max(best, q);
        }
        out.feasible = best >= -kTol;
        return out;
    }

    out.feasible = true;
    if (dim == 1) {
        out.bounded = true;
        out.bound = 0.0;
        return out;
    }

    // Remaining axes once the clock axis is pinned to v0 = 1.
    std::vector<int> rest_sign;
    rest_sign.reserve(static_cast<std::size_t>(dim - 1));
    for (int i = 0; i < dim; ++i)
        if (i != first_plus) rest_sign.push_back(signature[static_cast<std::size_t>(i)]);
    const int n = dim - 1;

    bool unbounded = false;
    double best = 0.0;
    auto consider = [&](Vec dir) {
        if (dir.norm() < 1e-12) return;
        dir.normalize();
        const double v = direction_value(rest_sign, dir, &unbounded);
        if (!unbounded && v > best) best = v;
    };

    // Axis and pairwise-diagonal directions catch every degenerate cone
    // exactly; random directions plus refinement cover the rest.
    for (int i = 0; i < n && !unbounded; ++i) {
        Vec e = Vec::Zero(n);
        e[i] = 1.0;
        consider(e);
        for (int j = i + 1; j < n && !unbounded; ++j) {
            Vec d = Vec::Zero(n);
            d[i] = 1.0;
            d[j] = 1.0;
            consider(d);
            d[j] = -1.0;
            consider(d);
        }
    }

    std::mt19937_64 rng(20240817);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec best_dir = Vec::Zero(n);
    for (int trial = 0; trial < 512 * n && !unbounded; ++trial) {
        Vec d(n);
        for (int i = 0; i < n; ++i) d[i] = gauss(rng);
        if (d.norm() < 1e-12) continue;
        d.normalize();
        bool ub = false;
        const double v = direction_value(rest_sign, d, &ub);
        if (ub) { unbounded = true; break; }
        if (v > best) { best = v; best_dir = d; }
    }

    // Local refinement: shrink coordinate perturbations around the incumbent.
    if (!unbounded && best_dir.norm() > 0.5) {
        double step = 0.25;
        while (step > kTol / 16.0 && !unbounded) {
            bool improved = false;
            for (int i = 0; i < n && !unbounded; ++i) {
                for (double s : {step, -step}) {
                    Vec d = best_dir;
                    d[i] += s;
                    d.normalize();
                    bool ub = false;
                    const double v = direction_value(rest_sign, d, &ub);
                    if (ub) { unbounded = true; break; }
                    if (v > best + 1e-15) {
                        best = v;
                        best_dir = d;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
    }

    out.bounded = !unbounded;
    if (out.bounded) out.bound = std::sqrt(best);
    return out;
}

}  // namespace rimech
