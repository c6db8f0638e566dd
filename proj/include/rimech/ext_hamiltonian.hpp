#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "rimech/metric.hpp"
#include "rimech/numeric.hpp"

namespace rimech {

// Gradient of a phase-space-time function, split into position and momentum
// parts (each of length dim).
struct PhaseGradient {
    Vec dx;
    Vec dp;
};

struct Observable {
    std::function<double(const ExtendedState&)> eval;
    std::function<PhaseGradient(const ExtendedState&)> exact_grad;  // optional

    double operator()(const ExtendedState& s) const { return eval(s); }
};

// Coordinate/momentum projections with exact gradients, handy as bracket
// probes and for the parametrization detector.
Observable coordinate_observable(int mu, int dim);
Observable momentum_observable(int mu, int dim);

enum class HLabel {
    coordinate_time,
    proper_time,
    proper_length,
    momentum,
    moving_particle,
    custom,
};

struct ExtHamiltonian {
    int dim = 0;
    std::function<double(const ExtendedState&)> eval;
    HLabel label = HLabel::custom;
    std::function<PhaseGradient(const ExtendedState&)> exact_grad;  // optional

    double operator()(const ExtendedState& s) const { return eval(s); }
    Observable as_observable() const { return Observable{eval, exact_grad}; }
};

// Sign convention for the (x0, p0) sector of the bracket.
//   time_minus: [[f,g]] = {f,g}_spatial - (df/dx0 dg/dp0 - df/dp0 dg/dx0),
//               the convention under which [[x0, p0]] = -1.
//   all_plus:   every conjugate pair contributes with the same sign,
//               [[x^mu, p_nu]] = delta^mu_nu.  Pairs with Hamiltonians of the
//               form H - c p^0 stated against a mostly-plus metric.
enum class BracketConvention { time_minus, all_plus };

PhaseGradient observable_gradient(const Observable& f, const ExtendedState& s);

double ext_bracket(const Observable& f, const Observable& g, const ExtendedState& s,
                   BracketConvention conv = BracketConvention::time_minus);

struct EvolveOptions {
    BracketConvention convention = BracketConvention::time_minus;
    bool monitor_only = false;   // skip the on-shell initialization gate
    double init_tol = 1e-9;     // |H(s0)| bound at start
    double drift_tol = 1e-6;    // abort threshold for |H| along the flow
};

// RK4 flow of dx^mu/dlambda = [[x^mu, H]], dp_mu/dlambda = [[p_mu, H]].
// Samples carry x, the momentum covector (aux) and |H| (diag).
Trajectory evolve(const ExtHamiltonian& H, const ExtendedState& s0,
                  const std::vector<double>& grid, const EvolveOptions& opts = {});

// dt/dlambda at s: the bracket of coordinate time with H, i.e. [[x0,H]]/c.
// Identifies what the evolution parameter physically is (1: coordinate time;
// 1/phi: proper time; -1: reversed time; 0: a spatial generator).
double parametrization_rate(const ExtHamiltonian& H, const ExtendedState& s, double c = 1.0,
                            BracketConvention conv = BracketConvention::time_minus);

double constraint_residual(const ExtHamiltonian& H, const ExtendedState& s);

// The catalog.  All forms are stated in the time_minus convention unless a
// module says otherwise; dim counts space-time coordinates (x0 first).
ExtHamiltonian make_coordinate_time_H(const Observable& Hcl, int dim, double c = 1.0);
ExtHamiltonian make_proper_time_H(const std::function<double(double)>& phi, int dim = 1,
                                  double c = 1.0);
ExtHamiltonian make_proper_length_H(const std::function<double(double)>& phi, int dim = 2);
ExtHamiltonian make_momentum_H(double p_ref, int dim = 2);
ExtHamiltonian make_moving_particle_H(double v, double p1_0, double E, int dim = 2);

// Change of flow parameter at the Hamiltonian level:
//   dxi H_xi = dlambda H_lambda + dlambda I
// gives H_xi = (H_lambda + I) / rate with rate = dxi/dlambda as a state
// function.  I must be an integral of the H_lambda flow that vanishes on the
// constraint surface; both conditions are checked numerically at the supplied
// probe states and a violation throws not-an-integral.
ExtHamiltonian gauge_relate_H(const ExtHamiltonian& H_lambda,
                              const std::function<double(const ExtendedState&)>& rate,
                              const Observable& I,
                              const std::vector<ExtendedState>& probes = {},
                              BracketConvention conv = BracketConvention::time_minus,
                              double tol = 1e-8);

}  // namespace rimech
