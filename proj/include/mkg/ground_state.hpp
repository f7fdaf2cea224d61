#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mkg/errors.hpp"

namespace mkg {

// Sampled radial ground state f_omega of
//   f'' + (2/r) f' - (m^2 - omega^2) f + f^p = 0,  f'(0) = 0,  f -> 0,
// positive and decreasing, with a fitted exponential tail. Samples are
// uniform on [0, r_max]; beyond the fitted seam the stored samples follow
// f(r) = f(seam) exp(-tail_rate (r - r_seam)).
struct GroundStateProfile {
  double m = 1.0;
  double omega = 0.0;
  double p = 2.0;
  Eigen::VectorXd r_samples;
  Eigen::VectorXd f_samples;
  Eigen::VectorXd df_samples;
  double tail_rate = 1.0;

  double r_max() const { return r_samples[r_samples.size() - 1]; }
  double dr() const { return r_samples[1] - r_samples[0]; }
  double f0() const { return f_samples[0]; }
  double mass_gap2() const { return m * m - omega * omega; }
};

// Shooting solve of the unit-normalized profile (m^2 - omega^2 = 1).
// Bisects on f(0) between zero-crossing and divergence, RK4 with a series
// start at the origin, then replaces the untrustworthy far tail by the
// fitted exponential.
GroundStateProfile solve_unit_profile(double p, double r_max, int n);

// f_omega(r) = (m^2-omega^2)^{1/(p-1)} f(sqrt(m^2-omega^2) r); sample-exact.
GroundStateProfile rescale_profile(const GroundStateProfile& unit, double m, double omega);

// quadrature norms used across the project: 4*pi * trapezoid of r^2 * integrand
double profile_l2_sq(const GroundStateProfile& prof);
double profile_grad_sq(const GroundStateProfile& prof);
double profile_lp1(const GroundStateProfile& prof);  // ||f||_{p+1}^{p+1}

// relative mismatches of the three virial/Pohozaev quantities
//   q1 = 3(p-1)(m^2-w^2) / (2 ||grad f||^2)
//   q2 = (5-p) / (2 ||f||^2)
//   q3 = (p+1)(m^2-w^2) / ||f||_{p+1}^{p+1}
// returns (|q1/q2 - 1|, |q3/q2 - 1|)
std::pair<double, double> energy_identity_residuals(const GroundStateProfile& prof);

// cubic Hermite interpolation on the samples for r <= r_max, exponential
// tail f(r_max) exp(-tail_rate (r - r_max)) beyond; returns (f, df)
std::pair<double, double> evaluate_profile(const GroundStateProfile& prof, double r);

// max |f'' + (2/r) f' - (m^2-w^2) f + f^p| over interior samples, with f''
// from second differences of the stored samples
double ode_residual_max(const GroundStateProfile& prof);

}  // namespace mkg
