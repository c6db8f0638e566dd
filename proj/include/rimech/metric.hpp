#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rimech/numeric.hpp"

namespace rimech {

// Position-dependent symmetric metric on a d-dimensional space-time chart.
// The first coordinate is x0 = c*t whenever a time axis exists.
struct Metric {
    int dim = 0;
    std::vector<int> signature;                 // +1 / -1 per axis
    std::function<Mat(const Vec&)> eval;        // x -> symmetric d x d matrix

    Mat operator()(const Vec& x) const { return eval(x); }
};

enum class SignatureOrder { plus_minus, minus_plus };

// Flat diagonal metric: (+,-,-,...) or (-,+,+,...).
Metric make_minkowski(int dim, SignatureOrder order);

// Point of the extended phase space: position x (with x[0] = c*t), conjugate
// momentum covector p (with p[0] = p0), and the evolution parameter that
// produced it.
struct ExtendedState {
    Vec x;
    Vec p;
    double lambda = 0.0;
};

enum class TrajectoryKind { configuration, phase };

// One accepted integration sample.  For configuration flows aux holds the
// velocity, for phase flows the momentum covector; diag carries whatever
// per-sample diagnostic the producing integrator tracks (Lagrangian value,
// constraint residual, ...).
struct Sample {
    double lambda = 0.0;
    Vec x;
    Vec aux;
    double diag = 0.0;
};

struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::configuration;
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }
    const Sample& operator[](std::size_t i) const { return samples[i]; }
};

// g_{uv}(x) a^u b^v and the special case a = b.
double inner(const Metric& m, const Vec& x, const Vec& a, const Vec& b);
double norm_squared(const Metric& m, const Vec& x, const Vec& v);

// Index gymnastics with the metric at a fixed point.
Vec lower_index(const Metric& m, const Vec& x, const Vec& v);
Vec raise_index(const Metric& m, const Vec& x, const Vec& p);

// Outcome of maximizing spatial speed |dx_spatial/dx0| over directions with
// g(v,v) >= 0 and v0 = 1 (v0 along the first positive axis).
struct SpeedBound {
    bool feasible = false;   // false when no nonzero v satisfies g(v,v) >= 0
    bool bounded = false;
    double bound = 0.0;      // meaningful only when feasible && bounded
};

// Direction search over the unit sphere (seeded samples, pairwise diagonals,
// then local refinement).  Signatures with exactly one positive axis come out
// bounded with bound 1; extra positive axes open unbounded cones; all
// negative axes make the constraint infeasible.
SpeedBound max_spatial_speed(const std::vector<int>& signature);

}  // namespace rimech
