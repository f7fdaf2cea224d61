#pragma once

#include <vector>

#include "mkg/evolve.hpp"
#include "mkg/soliton.hpp"

namespace mkg {

using Matrix8 = Eigen::Matrix<double, 8, 8>;

struct ModulationRecord {
  double t = 0.0;
  SolitonParams lam;
  double orth_residual = 0.0;   // max |G_a| after the fit
  Lambda8 gamma_dot = Lambda8::Zero();  // filled by modulation_residual
  double det_M = 0.0;           // det(M0 + M1) at the fitted point
  double v_h1 = 0.0;            // ||v||_{H1}
  double w_l2 = 0.0;            // ||w||_{L2}
};

struct FitOptions {
  int max_iterations = 50;
  double trust_radius = 0.1;     // Levenberg damping beyond this step size
  double tol_factor = 1e-8;      // converged when max|G_a| < tol_factor ||phi_S||^2
  int jacobian_refresh = 4;      // finite-difference Jacobian reuse period
};

// the 8 orthogonality functionals
//   G_a = <d_a phi_S, pi - psi_S> - <d_a psi_S, phi - phi_S>
// (the e^{-i Theta} rotations cancel inside the real pairing)
Lambda8 orthogonality_residuals(const FieldState& state, const ProfileFamily& fam,
                                const SolitonParams& lam);

// Newton root-find on the orthogonality functionals with a finite-difference
// Jacobian and Levenberg damping
ModulationRecord fit_lambda(const FieldState& state, const ProfileFamily& fam,
                            const SolitonParams& lam_guess, const FitOptions& opt = {});

// remainder fields v = e^{-i Theta}(phi - phi_S), w = e^{-i Theta}(pi - psi_S)
void remainder_fields(const FieldState& state, const ProfileFamily& fam,
                      const SolitonParams& lam, CArray& v, CArray& w);

// closed-form leading matrix: (M0)_{omega theta} = d_omega(omega ||f||^2),
// (M0)_{omega xi} = rho u d_omega G, (M0)_{xi u} = -rho G (I + rho^2 u u^T),
// antisymmetric
Matrix8 assemble_M0(const SolitonParams& lam, const ProfileFamily& fam);

// error matrix M1 = <d2_lambda phi_S, e^{i Theta} w> - <d2_lambda psi_S, e^{i Theta} v>,
// second derivatives by nested central differences (outer step 1e-4)
Matrix8 assemble_M1(const FieldState& state, const ProfileFamily& fam,
                    const SolitonParams& lam);

// G(omega) = omega^2 ||f_omega||^2 + (1/3) ||grad f_omega||^2 by quadrature
double G_of_omega(const GroundStateProfile& prof);

// scaling-law values used by assemble_M0 (analytic in omega)
double norm_sq_of_omega(const ProfileFamily& fam, double omega);
double d_omega_omega_norm_sq(const ProfileFamily& fam, double omega);
double G_scaled(const ProfileFamily& fam, double omega);
double d_omega_G_scaled(const ProfileFamily& fam, double omega);

// central-difference dot(lambda) minus V(lambda) per interior record; fills
// gamma_dot on the interior records and returns the per-record norms
std::vector<double> modulation_residual(std::vector<ModulationRecord>& records);

// forcing K(t; lambda) of the modulation system, by quadrature:
//   K_a = -<b^mu d_a phi_S, d_mu phi> - <d_a phi_S, c phi>
//         - <d_a phi_S, e^{i Theta} N(lambda)>
// with N the soliton-subtracted nonlinearity; used as a cross-check only
Lambda8 modulation_forcing(const FieldState& state, const ProfileFamily& fam,
                           const SolitonParams& lam);

}  // namespace mkg
