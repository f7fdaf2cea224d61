#include "mkg/diagnostics.hpp"

#include <cmath>

namespace mkg {

double total_charge(const FieldState& s) {
  auto sums = deterministic_grid_sum(s.grid.size(), 1, [&](std::int64_t i, double* acc) {
    acc[0] += re_pair(Complex(0, 1) * s.pi[i], s.phi[i]);
  });
  return -sums[0] * s.grid.cell_volume();
}

Eigen::Vector4d momenta(const FieldState& s) {
  std::array<CArray, 3> grad;
  for (int ax = 0; ax < 3; ++ax) grad[ax] = central_diff(s.phi, s.grid, ax);
  const double m2 = s.m * s.m;
  const double p = s.p;
  auto sums = deterministic_grid_sum(s.grid.size(), 4, [&](std::int64_t i, double* acc) {
    double gsq = 0;
    for (int ax = 0; ax < 3; ++ax) gsq += std::norm(grad[ax][i]);
    const double absphi = std::abs(s.phi[i]);
    acc[0] += 0.5 * (std::norm(s.pi[i]) + gsq + m2 * absphi * absphi) -
              std::pow(absphi, p + 1.0) / (p + 1.0);
    for (int k = 0; k < 3; ++k) acc[1 + k] += re_pair(s.pi[i], grad[k][i]);
  });
  Eigen::Vector4d out;
  out[0] = sums[0] * s.grid.cell_volume();
  for (int k = 0; k < 3; ++k) out[1 + k] = sums[1 + k] * s.grid.cell_volume();
  return out;
}

DecompResiduals decomposition_residuals(const FieldState& s, const ModulationRecord& rec,
                                        const ProfileFamily& fam) {
  const SolitonParams& lam = rec.lam;
  const GridSpec& grid = s.grid;
  const std::int64_t N = grid.size();
  const auto shifts = active_image_shifts(lam, fam, grid.L);
  const int n = grid.n;

  // rotated-frame remainders and their unrotated versions
  CArray rphi(N), rpi(N);  // e^{iT} v, e^{iT} w
  std::array<CArray, 3> dxi_phi, dxi_psi;  // -d_k phi_S = d_{xi_k} phi_S
  for (auto& a : dxi_phi) a.resize(N);
  for (auto& a : dxi_psi) a.resize(N);
  parallel_for(N, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
      const Eigen::Vector3d x = grid.point(ix, iy, iz);
      const auto d = d_lambda_soliton_periodic(x, lam, fam, shifts);
      const PhiPsi sol = eval_soliton_periodic(x, lam, fam, shifts);
      rphi[i] = s.phi[i] - sol.phi;
      rpi[i] = s.pi[i] - sol.psi;
      for (int k = 0; k < 3; ++k) {
        dxi_phi[k][i] = d[2 + k].phi;
        dxi_psi[k][i] = d[2 + k].psi;
      }
    }
  });

  std::array<CArray, 3> grad_rphi;
  for (int ax = 0; ax < 3; ++ax) grad_rphi[ax] = central_diff(rphi, grid, ax);

  const double p = fam.p();
  const double m2 = fam.m * fam.m;
  // accumulators: 0 <i e^{iT}w, e^{iT}v>, 1..3 <e^{iT}w, d_k(e^{iT}v)>,
  // 4 quadratic Pi0 part, 5..7 cross terms
  auto sums = deterministic_grid_sum(N, 8, [&](std::int64_t i, double* acc) {
    const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
    const Eigen::Vector3d x = grid.point(ix, iy, iz);
    const double th = theta_phase(x, lam);
    const Complex rot = std::polar(1.0, -th);
    const Complex v = rot * rphi[i];
    const Complex w = rot * rpi[i];
    acc[0] += re_pair(Complex(0, 1) * w, v);
    double gsq = 0;
    for (int k = 0; k < 3; ++k) {
      acc[1 + k] += re_pair(rpi[i], grad_rphi[k][i]);
      gsq += std::norm(grad_rphi[k][i]);
    }
    const double f = fam.eval(lam.omega, z_coords(x, lam).norm()).first;
    const double fp = std::pow(f, p - 1.0);
    const double v1 = std::real(v);
    acc[4] += 0.5 * (m2 * std::norm(v) + gsq + std::norm(w) - fp * std::norm(v) -
                     (p - 1.0) * fp * v1 * v1);
    // cross terms <d_k psi_S, e^{iT}v> - <e^{iT}w, d_k phi_S>; d_k = -d_{xi_k}
    for (int k = 0; k < 3; ++k)
      acc[5 + k] += re_pair(-dxi_psi[k][i], rphi[i]) - re_pair(rpi[i], -dxi_phi[k][i]);
  });

  const double vol = grid.cell_volume();
  const double rho = lam.rho();
  const double Nsq = norm_sq_of_omega(fam, lam.omega);
  const double G = G_scaled(fam, lam.omega);

  const double Q = total_charge(s);
  const Eigen::Vector4d Pi = momenta(s);

  DecompResiduals out;
  out.rQ = std::abs(Q - (lam.omega * Nsq - sums[0] * vol));
  for (int k = 0; k < 3; ++k) {
    const double formula = -rho * G * lam.u[k] + sums[1 + k] * vol;
    out.rPik = std::max(out.rPik, std::abs(Pi[1 + k] - formula));
    out.cross_terms = std::max(out.cross_terms, std::abs(sums[5 + k] * vol));
  }
  out.rPi0_gap = std::abs(Pi[0] - (rho * G + sums[4] * vol));
  return out;
}

double exterior_weighted_energy(const FieldState& s, double R0, int k) {
  if (k != 1 && k != 2) throw ParameterOutOfRange("weight power k must be 1 or 2");
  const double edge = R0 + s.t;
  if (edge >= s.grid.L)
    throw RegionLeftBox("exterior region |x| >= " + std::to_string(edge) +
                        " has left the box of half-width " + std::to_string(s.grid.L));
  std::array<CArray, 4> D;
  for (int mu = 0; mu < 4; ++mu) D[mu] = covariant_derivative(s, mu);
  const double m2 = s.m * s.m;
  const int n = s.grid.n;
  auto sums = deterministic_grid_sum(s.grid.size(), 1, [&](std::int64_t i, double* acc) {
    const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
    const Eigen::Vector3d x = s.grid.point(ix, iy, iz);
    const double r = x.norm();
    if (r < edge) return;
    double dsq = 0;
    for (int mu = 0; mu < 4; ++mu) dsq += std::norm(D[mu][i]);
    const double weight = 1.0 + (k == 1 ? r : r * r);
    acc[0] += weight * (dsq + m2 * std::norm(s.phi[i]));
  });
  return sums[0] * s.grid.cell_volume();
}

Eigen::Vector3d energy_centroid(const FieldState& s) {
  std::array<CArray, 3> grad;
  for (int ax = 0; ax < 3; ++ax) grad[ax] = central_diff(s.phi, s.grid, ax);
  const double m2 = s.m * s.m;
  const double p = s.p;
  const int n = s.grid.n;
  const double L = s.grid.L;
  // circular mean per axis: accumulate e * (cos, sin)(pi x / L) and total e
  auto sums = deterministic_grid_sum(s.grid.size(), 7, [&](std::int64_t i, double* acc) {
    double gsq = 0;
    for (int ax = 0; ax < 3; ++ax) gsq += std::norm(grad[ax][i]);
    const double absphi = std::abs(s.phi[i]);
    const double e = 0.5 * (std::norm(s.pi[i]) + gsq + m2 * absphi * absphi) -
                     std::pow(absphi, p + 1.0) / (p + 1.0);
    const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
    const int c[3] = {ix, iy, iz};
    for (int ax = 0; ax < 3; ++ax) {
      const double ang = M_PI * (-L + s.grid.h() * c[ax]) / L;
      acc[2 * ax] += e * std::cos(ang);
      acc[2 * ax + 1] += e * std::sin(ang);
    }
    acc[6] += e;
  });
  Eigen::Vector3d out;
  for (int ax = 0; ax < 3; ++ax)
    out[ax] = std::atan2(sums[2 * ax + 1], sums[2 * ax]) * L / M_PI;
  return out;
}

Straightness centroid_and_straightness(const std::vector<double>& times,
                                       const std::vector<Eigen::Vector3d>& centroids,
                                       const Eigen::Vector3d& u0, double L) {
  if (times.size() != centroids.size() || times.size() < 10)
    throw InsufficientSamples("need >= 10 centroid samples");
  // minimal-displacement continuation across the periodic box
  std::vector<Eigen::Vector3d> path(centroids.size());
  path[0] = centroids[0];
  for (std::size_t i = 1; i < centroids.size(); ++i) {
    Eigen::Vector3d d = centroids[i] - centroids[i - 1];
    for (int ax = 0; ax < 3; ++ax) {
      d[ax] = std::remainder(d[ax], 2.0 * L);
      if (std::abs(d[ax]) > 0.5 * L)
        throw UnwrapAmbiguity("centroid moved " + std::to_string(d[ax]) +
                              " in one sample (L/2 = " + std::to_string(0.5 * L) + ")");
    }
    path[i] = path[i - 1] + d;
  }

  Eigen::Vector3d dir = Eigen::Vector3d::Zero();
  const double u0n = u0.norm();
  // least-squares 3D slope
  double stt = 0;
  Eigen::Vector3d stx = Eigen::Vector3d::Zero();
  const double t0 = times[0];
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double dt = times[i] - t0;
    stt += dt * dt;
    stx += dt * (path[i] - path[0]);
  }
  const Eigen::Vector3d slope = stt > 0 ? Eigen::Vector3d(stx / stt) : Eigen::Vector3d::Zero();
  if (u0n > 0)
    dir = u0 / u0n;
  else if (slope.norm() > 1e-12)
    dir = slope.normalized();

  Straightness out;
  out.fitted_speed = u0n > 0 ? slope.dot(dir) : slope.norm();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Eigen::Vector3d d = path[i] - path[0];
    const Eigen::Vector3d perp = dir.squaredNorm() > 0 ? Eigen::Vector3d(d - dir * dir.dot(d)) : d;
    out.max_perp_dev = std::max(out.max_perp_dev, perp.norm());
  }
  return out;
}

namespace {

double l2_sq(const RArray& u, const GridSpec& g) {
  RArray sq = u.square();
  return pairwise_sum(sq) * g.cell_volume();
}

}  // namespace

double a_bootstrap_norm(const FieldState& s) {
  const GridSpec& g = s.grid;
  const double coup = s.delta * s.delta * s.eps * s.eps;

  // first time derivative of J (for the third-order t-derivative): needs the
  // scalar acceleration and the covariant pieces
  std::array<RArray, 4> a_tt;  // second time derivative of tilde A
  for (int nu = 0; nu < 4; ++nu) {
    a_tt[nu] = laplacian(s.a[nu], g);
    if (coup > 0) a_tt[nu] += coup * current_density_field(s, nu);
  }

  double worst = 0.0;

  // s = 0: d tilde A
  {
    double acc = 0;
    for (int nu = 0; nu < 4; ++nu) {
      acc += l2_sq(s.adot[nu], g);
      for (int j = 0; j < 3; ++j) acc += l2_sq(central_diff(s.a[nu], g, j), g);
    }
    worst = std::max(worst, std::sqrt(acc));
  }

  // s = 1: d d tilde A over ordered index pairs
  std::array<std::array<RArray, 3>, 4> dj_adot;
  {
    double acc = 0;
    for (int nu = 0; nu < 4; ++nu) {
      acc += l2_sq(a_tt[nu], g);  // (t,t)
      for (int j = 0; j < 3; ++j) {
        dj_adot[nu][j] = central_diff(s.adot[nu], g, j);
        acc += 2.0 * l2_sq(dj_adot[nu][j], g);  // (t,j) and (j,t)
        for (int k = 0; k < 3; ++k)
          acc += l2_sq(central_diff(central_diff(s.a[nu], g, j), g, k), g);
      }
    }
    worst = std::max(worst, std::sqrt(acc));
  }

  // s = 2: third derivatives; time derivatives through the wave equation
  {
    // d_t J needs pi_dot
    std::array<RArray, 4> dtJ;
    if (coup > 0) {
      const CArray pi_dot = acceleration(s, s.pi).pi_dot;
      std::array<CArray, 4> D;
      for (int mu = 0; mu < 4; ++mu) D[mu] = covariant_derivative(s, mu);
      std::array<CArray, 3> grad_pi;
      for (int j = 0; j < 3; ++j) grad_pi[j] = central_diff(s.pi, g, j);
      const std::int64_t N = g.size();
      const int n = g.n;
      for (int nu = 0; nu < 4; ++nu) dtJ[nu].resize(N);
      parallel_for(N, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) {
          const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n);
          double ab1 = 0, ab2 = 0;
          if (s.background_on()) {
            const auto ab = background_connection_xy(-g.L + g.h() * ix,
                                                     -g.L + g.h() * iy, s.eps);
            ab1 = ab[0];
            ab2 = ab[1];
          }
          const double A[4] = {s.a[0][i], s.a[1][i] + ab1, s.a[2][i] + ab2, s.a[3][i]};
          const Complex ph = s.phi[i];
          const Complex dDt = pi_dot[i] + Complex(0, 1) * (s.adot[0][i] * ph + A[0] * s.pi[i]);
          dtJ[0][i] = std::imag(s.pi[i] * std::conj(D[0][i])) + std::imag(ph * std::conj(dDt));
          for (int j = 0; j < 3; ++j) {
            const Complex dDj = grad_pi[j][i] +
                                Complex(0, 1) * (s.adot[j + 1][i] * ph + A[j + 1] * s.pi[i]);
            dtJ[j + 1][i] =
                std::imag(s.pi[i] * std::conj(D[j + 1][i])) + std::imag(ph * std::conj(dDj));
          }
        }
      });
    }
    double acc = 0;
    for (int nu = 0; nu < 4; ++nu) {
      RArray a_ttt = laplacian(s.adot[nu], g);
      if (coup > 0) a_ttt += coup * dtJ[nu];
      acc += l2_sq(a_ttt, g);  // (t,t,t)
      for (int j = 0; j < 3; ++j) {
        acc += 3.0 * l2_sq(central_diff(a_tt[nu], g, j), g);  // (t,t,j) perms
        for (int k = 0; k < 3; ++k) {
          acc += 3.0 * l2_sq(central_diff(dj_adot[nu][j], g, k), g);  // (t,j,k) perms
          for (int l = 0; l < 3; ++l)
            acc += l2_sq(
                central_diff(central_diff(central_diff(s.a[nu], g, j), g, k), g, l), g);
        }
      }
    }
    worst = std::max(worst, std::sqrt(acc));
  }
  return worst;
}

double dH_value(const SolitonParams& lam_t, const SolitonParams& lam_0,
                const ProfileFamily& fam) {
  const double rho_t = lam_t.rho();
  const double rho_0 = lam_0.rho();
  const double G_t = G_scaled(fam, lam_t.omega);
  const double G_0 = G_scaled(fam, lam_0.omega);
  const double N_t = norm_sq_of_omega(fam, lam_t.omega);
  const double N_0 = norm_sq_of_omega(fam, lam_0.omega);
  return rho_t * G_t * (1.0 - lam_0.u.dot(lam_t.u)) -
         lam_t.omega * lam_t.omega * N_t / rho_0 - G_0 / rho_0 +
         lam_0.omega * lam_t.omega * N_0 / rho_0;
}

DiagnosticsSample compute_sample(const FieldState& s, double R0,
                                 const std::optional<SolitonParams>& lam_t,
                                 const std::optional<SolitonParams>& lam_0,
                                 const ProfileFamily* fam) {
  DiagnosticsSample d;
  d.t = s.t;
  d.Q = total_charge(s);
  d.Pi = momenta(s);
  d.centroid = energy_centroid(s);
  d.gauge_res = gauge_residual(s);
  if (R0 > 0 && R0 + s.t < s.grid.L) {
    d.ext_energy_k1 = exterior_weighted_energy(s, R0, 1);
    d.ext_energy_k2 = exterior_weighted_energy(s, R0, 2);
  }
  d.a_bootstrap = a_bootstrap_norm(s);
  if (lam_t && lam_0 && fam) d.dH = dH_value(*lam_t, *lam_0, *fam);
  return d;
}

}  // namespace mkg
