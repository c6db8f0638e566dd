#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rimech/ext_hamiltonian.hpp"
#include "rimech/metric.hpp"
#include "rimech/numeric.hpp"

namespace rimech {

// Electromagnetic + gravitational background for a spinless charged particle.
// The metric is stated mostly-plus, so the (0,0) entry is the negative of the
// positive clock factor used in the formulas below: g00_positive = -g(x)(0,0).
// A weak-field potential U implies g00_positive = 1 - 2U/c^2; consistency of
// the two is a checkable diagnostic, not an enforcement.
struct BackgroundFields {
    Metric metric;
    std::function<Vec(const Vec&)> A;       // covector A_mu(x); empty means 0
    std::function<Mat(const Vec&)> dA;      // optional exact dA(mu,nu) = d_mu A_nu
    double q_charge = 0.0;
    double m = 1.0;                          // rest mass, must stay positive
    std::function<double(const Vec&)> U;     // optional weak-field potential
    double length_scale = 1.0;               // step scale for field derivatives
};

double g00_positive(const BackgroundFields& f, const Vec& x);

// Largest |g00_positive - (1 - 2U/c^2)| over the probes; 0 when U is absent.
double weak_field_consistency(const BackgroundFields& f, const std::vector<Vec>& probes,
                              double c);

// 1/sqrt(g00 - v.v/c^2) with the spatial square taken in the spatial metric
// block.  x is the full space-time position, v3 the coordinate 3-velocity.
double gamma_factor(const BackgroundFields& f, const Vec& x, const Vec& v3, double c);

// Right-hand side of the coordinate-time equations of motion for the
// kinematic momentum p_i = m gamma v_i:
//   dp_i/dt = qc(dA0/dx^i - dA_i/dx^0) + q(dA_j/dx^i - dA_i/dx^j) v^j
//             + (gravity gradient term),
// assembled from numeric (or exact) field derivatives.
struct CoordinateRhs {
    Vec dp_dt;  // covector, spatial
    Vec dx_dt;  // vector, spatial (= v3)
};

CoordinateRhs coordinate_time_rhs(const BackgroundFields& f, double t, const Vec& x3,
                                  const Vec& v3, double c);

// Invert p_i = m gamma g_ij v^j.  Closed form when the spatial block is
// diagonal; damped fixed-point iteration otherwise (<= 50 iterations,
// tolerance 1e-12).
Vec velocity_from_momentum(const BackgroundFields& f, const Vec& x, const Vec& p3, double c);

// Energy function along coordinate-time flows, h = -qcA0 + m gamma c^2 g00.
double energy_h(const BackgroundFields& f, const Vec& x, const Vec& v3, double c);

// Same energy from the canonical spatial momentum pi_i = qA_i + m gamma v_i,
// with the temporal momentum taken on the mass shell:
//   h = (pi-qA).(pi-qA)/(m gamma) - qcA0 + mc^2/gamma.
double energy_h_momentum(const BackgroundFields& f, const Vec& x, const Vec& pi3, double c);

// Variant with an explicitly supplied contravariant p0; gamma is recovered
// from gamma = (g00 - p.p/(p0)^2)^{-1/2} and an unrecoverable gamma (radicand
// <= 0) is an off-shell state.
double energy_h_momentum(const BackgroundFields& f, const Vec& x, const Vec& pi3, double p0,
                         double c);

// |g^{mu nu} p_mu p_nu + m^2 c^2| for a momentum covector at x.
double mass_shell_residual(const BackgroundFields& f, const Vec& x, const Vec& p_cov, double c);

// Proper-time flow in the full (x, pi) phase space.  The halved Hamiltonian
// (pi-qA).(pi-qA)/2m + mc^2/2 gives dx/dtau = u = (pi-qA)/m and
// dpi_rho/dtau = q A_{mu,rho} u^mu + (m/2) g_{mu nu,rho} u^mu u^nu, matching
// the proper-time Euler-Lagrange equations.  The unmodified form doubles the
// whole vector field (dx/dtau = 2u), kept available to demonstrate the
// factor of two.
enum class ProperHVariant { halved, unmodified };

struct ProperRhs {
    Vec dx_dtau;   // contravariant, full dimension
    Vec dpi_dtau;  // covector, full dimension
};

ProperRhs proper_time_rhs_tilde(const BackgroundFields& f, const ExtendedState& s, double c,
                                ProperHVariant variant = ProperHVariant::halved);

// RK4 drivers.  Coordinate-time samples: lambda = t, x = (ct, x3), aux = the
// contravariant 4-momentum (m gamma c, m gamma v), diag = energy h.
// Proper-time samples: lambda = tau, x = position, aux = momentum covector
// pi_mu, diag = mass-shell residual.
Trajectory integrate_coordinate_time(const BackgroundFields& f, double t0, const Vec& x3_0,
                                     const Vec& v3_0, const std::vector<double>& t_grid,
                                     double c);
Trajectory integrate_proper_time(const BackgroundFields& f, const ExtendedState& s0,
                                 const std::vector<double>& tau_grid, double c,
                                 ProperHVariant variant = ProperHVariant::halved);

// Diagnostic from the co-moving-frame consistency condition
// qA_{rho,0} = qA_{0,rho} + (mc/2) g00_{,rho}: the largest violation over the
// probes.  Informational only.
double comoving_consistency(const BackgroundFields& f, const std::vector<Vec>& probes, double c);

// Extended Hamiltonians over the momentum covector state.  Both are stated
// against the mostly-plus metric and pair with the all_plus bracket
// convention.  The coordinate form is h(x, pi_spatial) + c p_0 (the energy
// taken on shell, the time index raised with the asymptotic -1), which is
// exactly linear in p_0 so dx^0/dlambda = c identically.  The proper form is
// the uncharged p_i p^i / 2m + mc^2 + p_0 c gamma(x, p), whose rate is
// approximately c gamma.
ExtHamiltonian make_rel_coordinate_H(const BackgroundFields& f, double c);
ExtHamiltonian make_rel_proper_H(const BackgroundFields& f, double c);

// Mostly-plus metric with g00_positive = 1 - 2U/c^2 and a flat spatial block.
Metric make_weak_field_metric(const std::function<double(const Vec&)>& U, int dim, double c);

}  // namespace rimech
