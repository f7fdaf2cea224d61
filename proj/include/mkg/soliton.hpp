#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "mkg/conventions.hpp"
#include "mkg/errors.hpp"
#include "mkg/ground_state.hpp"
#include "mkg/grid.hpp"

namespace mkg {

using Lambda8 = Eigen::Matrix<double, 8, 1>;

// the 8-parameter soliton point: frequency, phase, center, velocity
struct SolitonParams {
  double omega = 0.8;
  double theta = 0.0;
  Eigen::Vector3d xi = Eigen::Vector3d::Zero();
  Eigen::Vector3d u = Eigen::Vector3d::Zero();

  double rho() const {
    const double u2 = u.squaredNorm();
    if (u2 >= 1.0) throw ParameterOutOfRange("|u| must be < 1");
    return 1.0 / std::sqrt(1.0 - u2);
  }
};

Lambda8 pack_lambda(const SolitonParams& lam);
SolitonParams unpack_lambda(const Lambda8& v);

// free transport velocity V(lambda) = (0, omega/rho, u, 0)
Lambda8 V_lambda(const SolitonParams& lam);

// boosted coordinate z = rho P_u (x - xi) + (I - P_u)(x - xi); P_u term is 0 at u = 0
Eigen::Vector3d z_coords(const Eigen::Vector3d& x, const SolitonParams& lam);

// Theta(x; lambda) = theta - omega u . z
double theta_phase(const Eigen::Vector3d& x, const SolitonParams& lam);

// profile family: the unit profile plus the mass, with all omega-dependence
// through the closed-form scaling (no re-solving per omega)
struct ProfileFamily {
  GroundStateProfile unit;  // normalized to m^2 - omega^2 = 1
  double m = 1.0;

  double p() const { return unit.p; }
  // f, f' of f_omega at radius r
  std::pair<double, double> eval(double omega, double r) const;
  double unit_l2_sq() const;    // cached ||f_unit||^2
  double unit_grad_sq() const;  // cached ||grad f_unit||^2

 private:
  mutable double l2_cache_ = -1.0, grad_cache_ = -1.0;
};

ProfileFamily make_family(double p, double m, double r_max = 30.0, int n = 4000);

struct PhiPsi {
  Complex phi{0.0, 0.0};
  Complex psi{0.0, 0.0};
};

// phi_S = e^{i Theta} f_omega(z), psi_S = e^{i Theta}(i rho omega f - rho u . grad_z f)
PhiPsi eval_soliton(const Eigen::Vector3d& x, const SolitonParams& lam, const ProfileFamily& fam);

// spec-facing variants taking the rescaled profile (must match lam.omega)
Complex eval_phi_S(const Eigen::Vector3d& x, const SolitonParams& lam,
                   const GroundStateProfile& prof);
Complex eval_psi_S(const Eigen::Vector3d& x, const SolitonParams& lam,
                   const GroundStateProfile& prof);

// all eight parameter derivatives (d phi_S, d psi_S); theta and xi are
// analytic, omega and u by central differences with step 1e-5
std::array<PhiPsi, 8> d_lambda_soliton(const Eigen::Vector3d& x, const SolitonParams& lam,
                                       const ProfileFamily& fam);

// contraction d_lambda psi_S . V(lambda), analytic (only theta/xi slots of V are nonzero)
Complex d_lambda_psi_dot_V(const Eigen::Vector3d& x, const SolitonParams& lam,
                           const ProfileFamily& fam);

// image shifts (multiples of the box period 2L) whose soliton copy is not
// negligible on the box; {0,0,0} always included
std::vector<Eigen::Vector3d> active_image_shifts(const SolitonParams& lam,
                                                 const ProfileFamily& fam, double L);

// periodized evaluation: sum of eval_soliton over the active images
PhiPsi eval_soliton_periodic(const Eigen::Vector3d& x, const SolitonParams& lam,
                             const ProfileFamily& fam,
                             const std::vector<Eigen::Vector3d>& shifts);
std::array<PhiPsi, 8> d_lambda_soliton_periodic(const Eigen::Vector3d& x,
                                                const SolitonParams& lam,
                                                const ProfileFamily& fam,
                                                const std::vector<Eigen::Vector3d>& shifts);

// discrete L2 norm over the grid of
//   Lap phi_S - m^2 phi_S + |phi_S|^{p-1} phi_S - d_lambda psi_S . V(lambda)
double nlw_residual(const SolitonParams& lam, const ProfileFamily& fam, const GridSpec& grid);

// |u| < 1 and (p-1)/(6-2p) < omega^2/m^2 < 1
bool in_stability_window(const SolitonParams& lam, double m, double p);

}  // namespace mkg
