#pragma once

#include <Eigen/Dense>

#include "mkg/ground_state.hpp"
#include "mkg/grid.hpp"
#include "mkg/soliton.hpp"

namespace mkg {

enum class WhichOperator { plus, minus };

// Discretized L+/- restricted to angular sector ell, in the substitution
// g = r f: the operator is -g'' + [ell(ell+1)/r^2 + (m^2-w^2) - c f_w^{p-1}] g
// on (0, r_max) with Dirichlet ends, a symmetric tridiagonal matrix on the
// interior nodes. c = p for L+, c = 1 for L-.
struct RadialOperator {
  WhichOperator which = WhichOperator::minus;
  int ell = 0;
  Eigen::VectorXd r_grid;   // interior nodes
  Eigen::VectorXd diag;
  Eigen::VectorXd offdiag;  // size diag.size()-1

  int size() const { return int(diag.size()); }
  double dr() const { return r_grid[1] - r_grid[0]; }
  Eigen::VectorXd apply(const Eigen::VectorXd& g) const;
};

RadialOperator assemble_operator(const GroundStateProfile& prof, WhichOperator which,
                                 int ell, int n);

// same grid and boundary treatment, but potential = constant (sanity checks)
RadialOperator assemble_free_operator(double kappa_sq, int ell, int n, double r_max);

// k smallest eigenvalues, ascending; each is verified against an inverse-
// iteration eigenvector to residual 1e-8 ||v||
Eigen::VectorXd lowest_eigenvalues(const RadialOperator& op, int k);

// eigenvector for a given (approximate) eigenvalue by inverse iteration
Eigen::VectorXd eigenvector_for(const RadialOperator& op, double eigenvalue);

// ||A g|| / ||g|| for a candidate kernel vector g
double kernel_residual(const RadialOperator& op, const Eigen::VectorXd& g);

// remainder energy
//   E = ||w + rho u . grad_z v - i rho w v||^2_{L2(dz)}
//     + <v1, L+ v1>_dz + <v2, L- v2>_dz
// for complex fields (v, w) on the periodic grid, quadrature in z measure
// (dz = rho dx); the quadratic forms are evaluated with central differences.
double remainder_energy(const CArray& v, const CArray& w, const SolitonParams& lam,
                        const ProfileFamily& fam, const GridSpec& grid);

}  // namespace mkg
