#pragma once

#include <optional>
#include <vector>

#include "mkg/evolve.hpp"
#include "mkg/modulation.hpp"
#include "mkg/soliton.hpp"

namespace mkg {

struct DiagnosticsSample {
  double t = 0.0;
  double Q = 0.0;
  Eigen::Vector4d Pi = Eigen::Vector4d::Zero();  // (Pi0, Pi1, Pi2, Pi3)
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double gauge_res = 0.0;
  double ext_energy_k1 = std::numeric_limits<double>::quiet_NaN();
  double ext_energy_k2 = std::numeric_limits<double>::quiet_NaN();
  double a_bootstrap = 0.0;
  double dH = std::numeric_limits<double>::quiet_NaN();
};

// total charge Q = -Integral <i d_t phi, phi> dx
double total_charge(const FieldState& s);

// Pi_k = Integral <d_t phi, d_k phi> dx and
// Pi_0 = (1/2) Integral |d_t phi|^2 + |grad phi|^2 + m^2 |phi|^2
//        - 2/(p+1) |phi|^{p+1} dx   (plain derivatives, as defined)
Eigen::Vector4d momenta(const FieldState& s);

struct DecompResiduals {
  double rQ = 0.0;        // |Q - (omega ||f||^2 - <iw, v>)|
  double rPik = 0.0;      // max_k |Pi_k - (-rho G u_k + <e^{iT}w, d_k(e^{iT}v)>)|
  double rPi0_gap = 0.0;  // |Pi_0 - rho G - quadratic(v,w)|, the cubic remainder
  double cross_terms = 0.0;  // max_k |<d_k psi_S, e^{iT}v> - <e^{iT}w, d_k phi_S>|
};

DecompResiduals decomposition_residuals(const FieldState& s, const ModulationRecord& rec,
                                        const ProfileFamily& fam);

// Integral over |x| >= R0 + t of (1+|x|^k)(|D phi|^2 + m^2 |phi|^2) dx,
// covariant derivatives; k in {1, 2}
double exterior_weighted_energy(const FieldState& s, double R0, int k);

// energy-weighted centroid with periodic (circular-mean) coordinates
Eigen::Vector3d energy_centroid(const FieldState& s);

struct Straightness {
  double max_perp_dev = 0.0;
  double fitted_speed = 0.0;
};

// unwraps the centroid series across the periodic box (minimal displacement
// continuation), then measures the deviation from the line x(0) + u0 t and
// the least-squares speed along u0
Straightness centroid_and_straightness(const std::vector<double>& times,
                                       const std::vector<Eigen::Vector3d>& centroids,
                                       const Eigen::Vector3d& u0, double L);

// max over s in {0,1,2} of the L2 norm of all (s+1)-th mixed derivatives of
// tilde A (ordered index tuples; time derivatives via adot and the wave equation)
double a_bootstrap_norm(const FieldState& s);

// dH(lambda_t; lambda_0) from G(omega), rho and ||f_omega||^2 at both points
double dH_value(const SolitonParams& lam_t, const SolitonParams& lam_0,
                const ProfileFamily& fam);

// one full row; dH filled when the fitted parameters are supplied
DiagnosticsSample compute_sample(const FieldState& s, double R0,
                                 const std::optional<SolitonParams>& lam_t = std::nullopt,
                                 const std::optional<SolitonParams>& lam_0 = std::nullopt,
                                 const ProfileFamily* fam = nullptr);

}  // namespace mkg
