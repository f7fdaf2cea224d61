#include "mkg/spectra.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace mkg {

Eigen::VectorXd RadialOperator::apply(const Eigen::VectorXd& g) const {
  const int n = size();
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    double v = diag[i] * g[i];
    if (i > 0) v += offdiag[i - 1] * g[i - 1];
    if (i + 1 < n) v += offdiag[i] * g[i + 1];
    out[i] = v;
  }
  return out;
}

namespace {

RadialOperator assemble_impl(int ell, int n, double r_max,
                             const std::function<double(double)>& potential) {
  if (ell < 0 || ell > 2) throw ParameterOutOfRange("sector ell must be 0, 1 or 2");
  if (n < 16) throw ParameterOutOfRange("operator grid too small");
  RadialOperator op;
  op.ell = ell;
  const double dr = r_max / n;
  const int m = n - 1;  // interior nodes
  op.r_grid.resize(m);
  op.diag.resize(m);
  op.offdiag = Eigen::VectorXd::Constant(m - 1, -1.0 / (dr * dr));
  for (int i = 0; i < m; ++i) {
    const double r = dr * (i + 1);
    op.r_grid[i] = r;
    op.diag[i] = 2.0 / (dr * dr) + ell * (ell + 1.0) / (r * r) + potential(r);
  }
  return op;
}

}  // namespace

RadialOperator assemble_operator(const GroundStateProfile& prof, WhichOperator which,
                                 int ell, int n) {
  const double c = which == WhichOperator::plus ? prof.p : 1.0;
  const double k2 = prof.mass_gap2();
  RadialOperator op = assemble_impl(ell, n, prof.r_max(), [&](double r) {
    auto [f, df] = evaluate_profile(prof, r);
    (void)df;
    return k2 - c * std::pow(std::abs(f), prof.p - 1.0);
  });
  op.which = which;
  return op;
}

RadialOperator assemble_free_operator(double kappa_sq, int ell, int n, double r_max) {
  return assemble_impl(ell, n, r_max, [&](double) { return kappa_sq; });
}

namespace {

// tridiagonal solve of (T - sigma I) x = b with partial pivoting
Eigen::VectorXd shifted_tridiag_solve(const RadialOperator& op, double sigma,
                                      Eigen::VectorXd b) {
  const int n = op.size();
  Eigen::VectorXd d(n), e(n), f(n);  // main, upper, second upper after elimination
  for (int i = 0; i < n; ++i) d[i] = op.diag[i] - sigma;
  for (int i = 0; i + 1 < n; ++i) e[i] = op.offdiag[i];
  e[n - 1] = 0;
  f.setZero();
  Eigen::VectorXd sub(n);  // subdiagonal copy
  sub.setZero();
  for (int i = 1; i < n; ++i) sub[i] = op.offdiag[i - 1];

  // LU with row swaps
  for (int i = 0; i + 1 < n; ++i) {
    if (std::abs(sub[i + 1]) > std::abs(d[i])) {
      std::swap(d[i], sub[i + 1]);
      std::swap(e[i], d[i + 1]);
      std::swap(f[i], e[i + 1]);
      std::swap(b[i], b[i + 1]);
    }
    if (d[i] == 0.0) d[i] = 1e-300;
    const double m = sub[i + 1] / d[i];
    d[i + 1] -= m * e[i];
    e[i + 1] -= m * f[i];
    b[i + 1] -= m * b[i];
  }
  if (d[n - 1] == 0.0) d[n - 1] = 1e-300;
  Eigen::VectorXd x(n);
  x[n - 1] = b[n - 1] / d[n - 1];
  if (n >= 2) x[n - 2] = (b[n - 2] - e[n - 2] * x[n - 1]) / d[n - 2];
  for (int i = n - 3; i >= 0; --i)
    x[i] = (b[i] - e[i] * x[i + 1] - f[i] * x[i + 2]) / d[i];
  return x;
}

}  // namespace

Eigen::VectorXd eigenvector_for(const RadialOperator& op, double eigenvalue) {
  const int n = op.size();
  const double scale = op.diag.cwiseAbs().maxCoeff();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  // deterministic seed with a bit of variation to avoid orthogonal starts
  for (int i = 0; i < n; ++i) v[i] *= 1.0 + 0.5 * std::sin(0.7 * (i + 1));
  v.normalize();
  double mu = eigenvalue;
  for (int it = 0; it < 6; ++it) {
    Eigen::VectorXd w = shifted_tridiag_solve(op, mu + 1e-14 * scale, v);
    const double norm = w.norm();
    if (!std::isfinite(norm) || norm == 0.0)
      throw ConvergenceFailure("inverse iteration produced a non-finite vector");
    v = w / norm;
    const double res = (op.apply(v) - eigenvalue * v).norm();
    if (res <= 1e-10 * scale) break;
  }
  return v;
}

Eigen::VectorXd lowest_eigenvalues(const RadialOperator& op, int k) {
  if (k < 1 || k > 10) throw ParameterOutOfRange("eigenvalue count k must be in [1,10]");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(op.diag, op.offdiag, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("tridiagonal eigenvalue iteration stalled");
  Eigen::VectorXd evs = solver.eigenvalues().head(k);
  // verify each eigenpair to the promised residual
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd v = eigenvector_for(op, evs[i]);
    const double res = (op.apply(v) - evs[i] * v).norm() / v.norm();
    const double scale = op.diag.cwiseAbs().maxCoeff();
    if (res > 1e-8 * scale)
      throw ConvergenceFailure("eigenpair residual " + std::to_string(res) +
                               " exceeds tolerance");
  }
  return evs;
}

double kernel_residual(const RadialOperator& op, const Eigen::VectorXd& g) {
  return op.apply(g).norm() / g.norm();
}

double remainder_energy(const CArray& v, const CArray& w, const SolitonParams& lam,
                        const ProfileFamily& fam, const GridSpec& grid) {
  if (v.size() != grid.size() || w.size() != grid.size())
    throw GridMismatch("remainder_energy fields do not match the grid");
  const double rho = lam.rho();
  const double omega = lam.omega;
  const double k2 = fam.m * fam.m - omega * omega;
  const double p = fam.p();

  // rho u . grad_z v = u . grad_x v
  CArray ugrad = CArray::Zero(grid.size());
  for (int ax = 0; ax < 3; ++ax)
    if (lam.u[ax] != 0.0) ugrad += lam.u[ax] * central_diff(v, grid, ax);

  const CArray first = w + ugrad - Complex(0.0, rho * omega) * v;

  // |grad_z v|^2 = rho^{-2} |d_par v|^2 + |grad_perp v|^2
  std::array<CArray, 3> gv;
  for (int ax = 0; ax < 3; ++ax) gv[ax] = central_diff(v, grid, ax);
  const double u2 = lam.u.squaredNorm();
  const Eigen::Vector3d uhat = u2 > 0 ? Eigen::Vector3d(lam.u / std::sqrt(u2))
                                      : Eigen::Vector3d::Zero();

  const int n = grid.n;
  auto result = deterministic_grid_sum(grid.size(), 1, [&](std::int64_t i, double* acc) {
    const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
    const Eigen::Vector3d x = grid.point(ix, iy, iz);
    const Eigen::Vector3d z = z_coords(x, lam);
    auto [f, df] = fam.eval(omega, z.norm());
    (void)df;
    const double fp = std::pow(std::abs(f), p - 1.0);
    const Complex gpar = u2 > 0 ? Complex(uhat[0] * gv[0][i] + uhat[1] * gv[1][i] +
                                          uhat[2] * gv[2][i])
                                : Complex(0.0);
    double grad1 = 0, grad2 = 0;  // |grad_z v1|^2, |grad_z v2|^2
    for (int ax = 0; ax < 3; ++ax) {
      const Complex gperp = gv[ax][i] - uhat[ax] * gpar;
      grad1 += std::real(gperp) * std::real(gperp);
      grad2 += std::imag(gperp) * std::imag(gperp);
    }
    grad1 += std::real(gpar) * std::real(gpar) / (rho * rho);
    grad2 += std::imag(gpar) * std::imag(gpar) / (rho * rho);
    const double v1 = std::real(v[i]), v2 = std::imag(v[i]);
    double e = std::norm(first[i]);                  // first block
    e += grad1 + (k2 - p * fp) * v1 * v1;            // <v1, L+ v1>
    e += grad2 + (k2 - fp) * v2 * v2;                // <v2, L- v2>
    acc[0] += e;
  });
  return result[0] * rho * grid.cell_volume();
}

}  // namespace mkg
