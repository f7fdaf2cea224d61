#pragma once

#include <array>
#include <optional>

#include "mkg/grid.hpp"
#include "mkg/soliton.hpp"

namespace mkg {

// complex scalar, its time derivative, and the connection deviation with its
// time derivative, plus the physical constants of the rescaled system
struct FieldState {
  GridSpec grid;
  double t = 0.0;
  CArray phi, pi;                 // pi stores the plain time derivative d_t phi
  std::array<RArray, 4> a;        // tilde A components (deviation from background)
  std::array<RArray, 4> adot;
  double m = 1.0, p = 2.0;
  double eps = 0.0, delta = 0.0;
  Eigen::Vector3d u0 = Eigen::Vector3d::Zero();

  bool background_on() const { return eps > 0.0; }
  bool maxwell_dynamic() const { return eps > 0.0 && delta > 0.0; }
  void check_grid() const;
};

struct Perturbation {
  CArray v;  // added to phi_S
  CArray w;  // added to psi_S (as covariant D_t phi data)
};

// Constraint-consistent initial data:
//   phi0   = phi_S(lambda0) + v
//   D_t phi(0) = psi_S(lambda0) + w,   pi0 = D_t phi(0) - i A_0 phi0
//   Lap A0 = -delta^2 eps^2 Im(phi0 conj(phi1))  (spectral, zero-mean source)
//   spatial tilde A = 0, all adot = 0
// so the Lorentz gauge residual and its time derivative vanish initially.
FieldState build_initial_data(const SolitonParams& lam0, const ProfileFamily& fam,
                              const GridSpec& grid, double eps, double delta,
                              const std::optional<Perturbation>& pert = std::nullopt,
                              double box_fit_tol = 1e-8);

struct Accel {
  CArray pi_dot;
  std::array<RArray, 4> a_ddot;
};

// right-hand sides at the state's current time; `pi_guess` supplies the time
// derivative used in the velocity-dependent terms
Accel acceleration(const FieldState& s, const CArray& pi_guess);

// kick-drift-kick with one fixed-point pass for the velocity-dependent
// terms (two acceleration evaluations per step once warmed up)
class Stepper {
 public:
  explicit Stepper(FieldState initial);
  void step();
  const FieldState& state() const { return state_; }
  FieldState& state() { return state_; }

 private:
  FieldState state_;
  Accel acc_;
  double blowup_limit_;
};

// single-step convenience wrapper
FieldState step(const FieldState& s);

// covariant derivative D_mu phi, mu in {0,1,2,3}; A = A_b + tilde A
CArray covariant_derivative(const FieldState& s, int mu);

// current density J_nu = Im(phi conj(D_nu phi))
RArray current_density_field(const FieldState& s, int nu);

struct EBFields {
  std::array<RArray, 3> E;
  std::array<RArray, 3> B;
};

// F from central differences of tilde A plus the exact background
// contribution: E_i = F_{i0}, B_k = (1/2) eps_{kij} F_{ij}
EBFields field_strength(const FieldState& s);

// L2 norm of the discrete Lorentz gauge residual -d_t A0 + d_j A_j
double gauge_residual(const FieldState& s);

// L2 norm of div E + delta^2 eps^2 (J_0 - mean), evaluated spectrally,
// consistent with the spectral construction of the initial data
double initial_constraint_residual(const FieldState& s);

}  // namespace mkg
