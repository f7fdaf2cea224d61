#pragma once

// Index and sign conventions, kept in one place (see docs/conventions.md).
//
//   metric            (-,+,+,+), so raising the 0-index flips its sign
//   box operator      [] = -d_tt + Laplacian
//   field strength    F_{mu nu} = d_mu A_nu - d_nu A_mu
//   electric field    E_i = F_{i0} = d_i A_0 - d_t A_i
//   magnetic field    B_k = (1/2) eps_{kij} F_{ij}   (B = curl of the spatial A)
//   current           J_nu = Im(phi * conj(D_nu phi)),  D_nu = d_nu + i A_nu
//   Maxwell           d^mu F_{mu nu} = -delta^2 eps^2 J_nu
//   Lorentz gauge     d^mu A_mu = -d_t A_0 + d_j A_j = 0
//   wave form         d_tt A_nu = Lap A_nu + delta^2 eps^2 J_nu
//   scalar equation   d_tt phi = Lap phi - m^2 phi + |phi|^{p-1} phi
//                               + b^mu d_mu phi + c phi,
//                     b^mu d_mu = 2i(-A_0 d_t + A_j d_j),  c = A_0^2 - |A_vec|^2
//   L2 pairing        <a,b> = Re Integral a * conj(b) dx
//
// The background connection (A_b)_1 = -x2 eps^2/2, (A_b)_2 = x1 eps^2/2
// generates B = (0,0,eps^2) under these signs, and the t=0 Maxwell
// constraint reads div E(0) = -delta^2 eps^2 Im(phi0 * conj(phi1)).

#include <complex>

#include <Eigen/Dense>

namespace mkg {

using Complex = std::complex<double>;

// raise a 0-index component
constexpr double raise0(double a0) { return -a0; }

// real L2 pairing density <a,b> = (a conj(b) + conj(a) b)/2
inline double re_pair(Complex a, Complex b) { return std::real(a * std::conj(b)); }

// current density J_nu = Im(phi conj(D_nu phi)) given D_nu phi
inline double current_density(Complex phi, Complex d_nu_phi) {
  return std::imag(phi * std::conj(d_nu_phi));
}

// background connection at a point; components 0 and 3 vanish
inline Eigen::Vector2d background_connection_xy(double x1, double x2, double eps) {
  const double e2 = eps * eps;
  return {-0.5 * x2 * e2, 0.5 * x1 * e2};
}

}  // namespace mkg
