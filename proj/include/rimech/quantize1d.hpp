#pragma once

#include <complex>
#include <functional>

#include "rimech/numeric.hpp"
#include "rimech/rel_particle.hpp"

namespace rimech {

using CVec = Eigen::VectorXcd;

enum class VarKind { time, space };
enum class SpatialGauge { momentum, proper_length };

// Sampled complex wave over a uniform grid of the declared variable.
struct WaveFunction {
    Vec grid;
    CVec values;
    double hbar = 1.0;
    VarKind var_kind = VarKind::time;
};

// Validates uniformity (relative 1e-12 against the grid magnitude) and value
// finiteness, and returns the spacing.
double grid_spacing(const WaveFunction& psi);

// Positive conserved-momentum field phi(t) or phi(q) with a declared
// fluctuation scale delta and its far-field constant value.
struct PhiField {
    std::function<double(double)> eval;
    double delta = 0.0;
    double asymptotic = 0.0;
};

// psi(t) = (1/N) exp[-(i/hbar) Int_0^t phi], cumulative trapezoid phase.
WaveFunction synth_psi_coordinate(const PhiField& phi, const std::vector<double>& grid,
                                  double hbar, double N = 1.0);

// Same phase with sqrt(phi(t)) amplitude, the positive-frequency solution of
// the symmetrized equation i hbar d_t psi = [phi + (i hbar / 2) d_t ln phi] psi.
WaveFunction synth_psi_proper(const PhiField& phi, const std::vector<double>& grid,
                              double hbar, double N = 1.0);

// Spatial analog with the +i phase sign; the proper-length gauge adds the
// sqrt(phi(q)) amplitude.
WaveFunction synth_psi_spatial(const PhiField& phi, const std::vector<double>& grid,
                               double hbar, double N = 1.0,
                               SpatialGauge gauge = SpatialGauge::momentum);

// (1/Delta) Int_{t0}^{t0+Delta} conj(a) b, trapezoid over the shared grid with
// linear interpolation into the fractional end cells.
std::complex<double> inner_product_windowed(const WaveFunction& a, const WaveFunction& b,
                                            double t0, double Delta);

// p0_hat = +i hbar d/dt on time waves; p1_hat = -i hbar d/dq on space waves.
// Central differences inside, one-sided at the two ends.
WaveFunction apply_p0(const WaveFunction& psi);
WaveFunction apply_p1(const WaveFunction& psi);

// (1/Delta) Int_0^Delta phi, trapezoid on n_samples uniform points: the mean
// clock rate dtau/dt (or dl/dq) seen over an observation window.
double running_average(const PhiField& phi, double Delta, int n_samples = 20001);

// Pointwise ratio (c P0_hat psi)/psi = i hbar gamma psi'/psi at the grid point
// nearest t, for a rest-frame wave in the weak-field metric of `fields`.
// gamma comes from the clock factor at (ct, 0,...).  psi must have been
// synthesized in the proper gauge from the energy field mc^2 sqrt(g00).
std::complex<double> energy_shift_weak_gravity(const BackgroundFields& fields,
                                               const WaveFunction& psi, double t,
                                               double c = 1.0);

}  // namespace rimech
