#include "mkg/modulation.hpp"

#include <cmath>

namespace mkg {

namespace {

// one pass over the grid accumulating the 8 pairings of d_lambda(phi_S,psi_S)
// against fixed complex fields (rw paired with d_a phi_S, rv with d_a psi_S):
//   out_a = <d_a phi_S, rw> - <d_a psi_S, rv>
Lambda8 pairing_pass(const GridSpec& grid, const ProfileFamily& fam,
                     const SolitonParams& lam, const CArray& rw, const CArray& rv) {
  const auto shifts = active_image_shifts(lam, fam, grid.L);
  const int n = grid.n;
  auto sums = deterministic_grid_sum(grid.size(), 8, [&](std::int64_t i, double* acc) {
    const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
    const auto d = d_lambda_soliton_periodic(grid.point(ix, iy, iz), lam, fam, shifts);
    for (int a = 0; a < 8; ++a)
      acc[a] += re_pair(d[a].phi, rw[i]) - re_pair(d[a].psi, rv[i]);
  });
  Lambda8 out;
  for (int a = 0; a < 8; ++a) out[a] = sums[a] * grid.cell_volume();
  return out;
}

// phi - phi_S and pi - psi_S (no phase rotation; pairings are phase-blind)
void raw_remainders(const FieldState& state, const ProfileFamily& fam,
                    const SolitonParams& lam, CArray& rphi, CArray& rpi) {
  const GridSpec& grid = state.grid;
  const auto shifts = active_image_shifts(lam, fam, grid.L);
  const std::int64_t N = grid.size();
  rphi.resize(N);
  rpi.resize(N);
  const int n = grid.n;
  parallel_for(N, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
      const PhiPsi s = eval_soliton_periodic(grid.point(ix, iy, iz), lam, fam, shifts);
      rphi[i] = state.phi[i] - s.phi;
      rpi[i] = state.pi[i] - s.psi;
    }
  });
}

}  // namespace

Lambda8 orthogonality_residuals(const FieldState& state, const ProfileFamily& fam,
                                const SolitonParams& lam) {
  CArray rphi, rpi;
  raw_remainders(state, fam, lam, rphi, rpi);
  return pairing_pass(state.grid, fam, lam, rpi, rphi);
}

void remainder_fields(const FieldState& state, const ProfileFamily& fam,
                      const SolitonParams& lam, CArray& v, CArray& w) {
  raw_remainders(state, fam, lam, v, w);
  const GridSpec& grid = state.grid;
  const int n = grid.n;
  parallel_for(grid.size(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
      const Complex rot = std::polar(1.0, -theta_phase(grid.point(ix, iy, iz), lam));
      v[i] *= rot;
      w[i] *= rot;
    }
  });
}

double norm_sq_of_omega(const ProfileFamily& fam, double omega) {
  const double p = fam.p();
  const double k2 = fam.m * fam.m - omega * omega;
  const double alpha = (7.0 - 3.0 * p) / (2.0 * (p - 1.0));
  return std::pow(k2, alpha) * fam.unit_l2_sq();
}

double d_omega_omega_norm_sq(const ProfileFamily& fam, double omega) {
  const double p = fam.p();
  const double m2 = fam.m * fam.m;
  const double k2 = m2 - omega * omega;
  const double alpha = (7.0 - 3.0 * p) / (2.0 * (p - 1.0));
  return (m2 - (6.0 - 2.0 * p) / (p - 1.0) * omega * omega) * std::pow(k2, alpha - 1.0) *
         fam.unit_l2_sq();
}

double G_scaled(const ProfileFamily& fam, double omega) {
  const double p = fam.p();
  const double k2 = fam.m * fam.m - omega * omega;
  const double beta = (5.0 - p) / (2.0 * (p - 1.0));
  return omega * omega * norm_sq_of_omega(fam, omega) +
         std::pow(k2, beta) * fam.unit_grad_sq() / 3.0;
}

double d_omega_G_scaled(const ProfileFamily& fam, double omega) {
  const double p = fam.p();
  const double k2 = fam.m * fam.m - omega * omega;
  const double alpha = (7.0 - 3.0 * p) / (2.0 * (p - 1.0));
  const double beta = (5.0 - p) / (2.0 * (p - 1.0));
  const double N = norm_sq_of_omega(fam, omega);
  const double dN = alpha * std::pow(k2, alpha - 1.0) * (-2.0 * omega) * fam.unit_l2_sq();
  const double dGr = beta * std::pow(k2, beta - 1.0) * (-2.0 * omega) * fam.unit_grad_sq();
  return 2.0 * omega * N + omega * omega * dN + dGr / 3.0;
}

double G_of_omega(const GroundStateProfile& prof) {
  return prof.omega * prof.omega * profile_l2_sq(prof) + profile_grad_sq(prof) / 3.0;
}

Matrix8 assemble_M0(const SolitonParams& lam, const ProfileFamily& fam) {
  Matrix8 M = Matrix8::Zero();
  const double rho = lam.rho();
  const double dwN = d_omega_omega_norm_sq(fam, lam.omega);
  const double G = G_scaled(fam, lam.omega);
  const double dG = d_omega_G_scaled(fam, lam.omega);

  M(0, 1) = dwN;                                     // (omega, theta)
  for (int k = 0; k < 3; ++k) M(0, 2 + k) = rho * lam.u[k] * dG;  // (omega, xi)
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)                      // (xi, u)
      M(2 + j, 5 + k) = -rho * G * ((j == k ? 1.0 : 0.0) + rho * rho * lam.u[j] * lam.u[k]);

  Matrix8 out = M - M.transpose();
  return out;
}

Matrix8 assemble_M1(const FieldState& state, const ProfileFamily& fam,
                    const SolitonParams& lam) {
  // M1_{ab} = d_b [ <d_a phi_S(mu), e^{i Theta} w> - <d_a psi_S(mu), e^{i Theta} v> ]
  // at mu = lambda, with the remainder fields frozen; e^{i Theta} w = pi - psi_S
  // and e^{i Theta} v = phi - phi_S by the decomposition
  CArray rphi, rpi;
  raw_remainders(state, fam, lam, rphi, rpi);
  constexpr double h = 1e-4;
  Matrix8 M;
  for (int b = 0; b < 8; ++b) {
    Lambda8 lp = pack_lambda(lam), lm = pack_lambda(lam);
    lp[b] += h;
    lm[b] -= h;
    const Lambda8 Hp = pairing_pass(state.grid, fam, unpack_lambda(lp), rpi, rphi);
    const Lambda8 Hm = pairing_pass(state.grid, fam, unpack_lambda(lm), rpi, rphi);
    M.col(b) = (Hp - Hm) / (2.0 * h);
  }
  return M;
}

namespace {

double phi_s_norm_sq(const SolitonParams& lam, const ProfileFamily& fam) {
  // ||phi_S||_{L2(dx)}^2 = rho^{-1} ||f_omega||^2 (dz = rho dx)
  return norm_sq_of_omega(fam, lam.omega) / lam.rho();
}

}  // namespace

ModulationRecord fit_lambda(const FieldState& state, const ProfileFamily& fam,
                            const SolitonParams& lam_guess, const FitOptions& opt) {
  state.check_grid();
  if (!in_stability_window(lam_guess, fam.m, fam.p()))
    throw OutsideStabilityWindow("fit guess");

  const double scale = phi_s_norm_sq(lam_guess, fam);
  const double tol = opt.tol_factor * scale;

  SolitonParams lam = lam_guess;
  Lambda8 G = orthogonality_residuals(state, fam, lam);
  Matrix8 J;
  bool have_jacobian = false;
  int since_refresh = 0;

  constexpr double fd = 1e-5;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (G.cwiseAbs().maxCoeff() < tol) break;
    if (!have_jacobian || since_refresh >= opt.jacobian_refresh) {
      for (int b = 0; b < 8; ++b) {
        Lambda8 lp = pack_lambda(lam), lm = pack_lambda(lam);
        lp[b] += fd;
        lm[b] -= fd;
        const Lambda8 Gp = orthogonality_residuals(state, fam, unpack_lambda(lp));
        const Lambda8 Gm = orthogonality_residuals(state, fam, unpack_lambda(lm));
        J.col(b) = (Gp - Gm) / (2.0 * fd);
      }
      have_jacobian = true;
      since_refresh = 0;
    }
    Lambda8 step = J.fullPivLu().solve(-G);
    if (step.norm() > opt.trust_radius) {
      // Levenberg damping until the step fits the trust region
      double mu = 1e-4 * J.diagonal().cwiseAbs().maxCoeff();
      const Matrix8 JtJ = J.transpose() * J;
      const Lambda8 JtG = J.transpose() * G;
      for (int d = 0; d < 60 && step.norm() > opt.trust_radius; ++d) {
        step = (JtJ + mu * Matrix8::Identity()).ldlt().solve(-JtG);
        mu *= 2.0;
      }
      if (step.norm() > opt.trust_radius) step *= opt.trust_radius / step.norm();
    }
    SolitonParams next = unpack_lambda(pack_lambda(lam) + step);
    if (!in_stability_window(next, fam.m, fam.p()))
      throw OutsideStabilityWindow("fit left the stability window at iteration " +
                                   std::to_string(it));
    const Lambda8 Gnext = orthogonality_residuals(state, fam, next);
    if (Gnext.cwiseAbs().maxCoeff() > 0.9 * G.cwiseAbs().maxCoeff() && since_refresh > 0) {
      since_refresh = opt.jacobian_refresh;  // stale Jacobian, refresh next round
    }
    lam = next;
    G = Gnext;
    ++since_refresh;
  }
  if (G.cwiseAbs().maxCoeff() >= tol)
    throw FitDiverged("orthogonality residual " + std::to_string(G.cwiseAbs().maxCoeff()) +
                      " after " + std::to_string(it) + " iterations (tol " +
                      std::to_string(tol) + ")");

  ModulationRecord rec;
  rec.t = state.t;
  rec.lam = lam;
  rec.orth_residual = G.cwiseAbs().maxCoeff();

  CArray v, w;
  remainder_fields(state, fam, lam, v, w);
  double grad_sq = 0;
  for (int ax = 0; ax < 3; ++ax) {
    const CArray gv = central_diff(v, state.grid, ax);
    RArray sq = gv.abs2();
    grad_sq += pairwise_sum(sq) * state.grid.cell_volume();
  }
  const double v_l2 = l2_norm(v, state.grid);
  rec.v_h1 = std::sqrt(v_l2 * v_l2 + grad_sq);
  rec.w_l2 = l2_norm(w, state.grid);
  rec.det_M = (assemble_M0(lam, fam) + assemble_M1(state, fam, lam)).determinant();
  return rec;
}

std::vector<double> modulation_residual(std::vector<ModulationRecord>& records) {
  if (records.size() < 3)
    throw InsufficientSamples("need at least 3 modulation records");
  const double dt0 = records[1].t - records[0].t;
  for (std::size_t i = 1; i + 1 < records.size(); ++i) {
    const double d1 = records[i].t - records[i - 1].t;
    const double d2 = records[i + 1].t - records[i].t;
    if (std::abs(d1 - dt0) > 1e-9 * std::max(1.0, std::abs(dt0)) ||
        std::abs(d2 - dt0) > 1e-9 * std::max(1.0, std::abs(dt0)))
      throw InsufficientSamples("records are not uniformly spaced");
  }
  std::vector<double> norms;
  for (std::size_t i = 1; i + 1 < records.size(); ++i) {
    Lambda8 prev = pack_lambda(records[i - 1].lam);
    Lambda8 next = pack_lambda(records[i + 1].lam);
    // unwrap the phase before differencing
    double dth = next[1] - prev[1];
    dth = std::remainder(dth, 2.0 * M_PI);
    Lambda8 dot = (next - prev) / (2.0 * dt0);
    dot[1] = dth / (2.0 * dt0);
    const Lambda8 gd = dot - V_lambda(records[i].lam);
    records[i].gamma_dot = gd;
    norms.push_back(gd.norm());
  }
  return norms;
}

Lambda8 modulation_forcing(const FieldState& state, const ProfileFamily& fam,
                           const SolitonParams& lam) {
  const GridSpec& grid = state.grid;
  const std::int64_t N = grid.size();
  const auto shifts = active_image_shifts(lam, fam, grid.L);
  const int n = grid.n;

  std::array<CArray, 3> grad;
  for (int ax = 0; ax < 3; ++ax) grad[ax] = central_diff(state.phi, grid, ax);

  const double p = fam.p();
  const double eps = state.eps;
  const bool coupled = state.background_on();

  auto sums = deterministic_grid_sum(N, 8, [&](std::int64_t i, double* acc) {
    const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
    const Eigen::Vector3d x = grid.point(ix, iy, iz);
    const auto d = d_lambda_soliton_periodic(x, lam, fam, shifts);
    const PhiPsi sol = eval_soliton_periodic(x, lam, fam, shifts);

    // connection terms; note <b^mu d_a phi_S, d_mu phi> = -<d_a phi_S, b^mu d_mu phi>
    // because b^mu is purely imaginary under the real pairing
    Complex bterm(0.0, 0.0), cterm(0.0, 0.0);
    if (coupled || state.maxwell_dynamic()) {
      double a0 = state.a[0][i], a1 = state.a[1][i], a2 = state.a[2][i],
             a3 = state.a[3][i];
      if (coupled) {
        const auto ab = background_connection_xy(x[0], x[1], eps);
        a1 += ab[0];
        a2 += ab[1];
      }
      bterm = Complex(0.0, 2.0) *
              (-a0 * state.pi[i] + a1 * grad[0][i] + a2 * grad[1][i] + a3 * grad[2][i]);
      cterm = (a0 * a0 - a1 * a1 - a2 * a2 - a3 * a3) * state.phi[i];
    }

    // nonlinearity with the linearization around the soliton removed:
    //   e^{i Theta} N = |phi|^{p-1} phi - |phi_S|^{p-1} phi_S
    //                  - f^{p-1} (phi - phi_S) - (p-1) f^{p-1} Re(e^{-iT}(phi-phi_S)) e^{iT}
    const double th = theta_phase(x, lam);
    const Complex eiT = std::polar(1.0, th);
    const double f = std::abs(sol.phi);
    const double fp = std::pow(f, p - 1.0);
    const Complex dphi = state.phi[i] - sol.phi;
    const Complex nl = std::pow(std::abs(state.phi[i]), p - 1.0) * state.phi[i] -
                       fp * sol.phi - fp * dphi -
                       (p - 1.0) * fp * std::real(dphi * std::conj(eiT)) * eiT;

    for (int a = 0; a < 8; ++a)
      acc[a] += re_pair(d[a].phi, bterm) - re_pair(d[a].phi, cterm + nl);
  });
  Lambda8 out;
  for (int a = 0; a < 8; ++a) out[a] = sums[a] * grid.cell_volume();
  return out;
}

}  // namespace mkg
