#include "mkg/soliton.hpp"

#include <cmath>

namespace mkg {

Lambda8 pack_lambda(const SolitonParams& lam) {
  Lambda8 v;
  v << lam.omega, lam.theta, lam.xi(0), lam.xi(1), lam.xi(2), lam.u(0), lam.u(1), lam.u(2);
  return v;
}

SolitonParams unpack_lambda(const Lambda8& v) {
  SolitonParams lam;
  lam.omega = v[0];
  lam.theta = v[1];
  lam.xi = v.segment<3>(2);
  lam.u = v.segment<3>(5);
  return lam;
}

Lambda8 V_lambda(const SolitonParams& lam) {
  Lambda8 v = Lambda8::Zero();
  v[1] = lam.omega / lam.rho();
  v.segment<3>(2) = lam.u;
  return v;
}

namespace {

constexpr double kTinyU2 = 1e-28;

// boost matrix S = I + (rho - 1) uhat uhat^T, so z = S (x - xi)
Eigen::Matrix3d boost_matrix(const SolitonParams& lam) {
  Eigen::Matrix3d S = Eigen::Matrix3d::Identity();
  const double u2 = lam.u.squaredNorm();
  if (u2 > kTinyU2) {
    const double rho = lam.rho();
    S += (rho - 1.0) / u2 * (lam.u * lam.u.transpose());
  }
  return S;
}

}  // namespace

Eigen::Vector3d z_coords(const Eigen::Vector3d& x, const SolitonParams& lam) {
  const Eigen::Vector3d d = x - lam.xi;
  const double u2 = lam.u.squaredNorm();
  if (u2 <= kTinyU2) return d;
  const double rho = lam.rho();
  return d + (rho - 1.0) / u2 * (lam.u.dot(d)) * lam.u;
}

double theta_phase(const Eigen::Vector3d& x, const SolitonParams& lam) {
  return lam.theta - lam.omega * lam.u.dot(z_coords(x, lam));
}

std::pair<double, double> ProfileFamily::eval(double omega, double r) const {
  const double k2 = m * m - omega * omega;
  if (k2 <= 0) throw ParameterOutOfRange("family eval needs omega^2 < m^2");
  const double k = std::sqrt(k2);
  const double amp = std::pow(k2, 1.0 / (unit.p - 1.0));
  auto [f, df] = evaluate_profile(unit, k * r);
  return {amp * f, amp * k * df};
}

double ProfileFamily::unit_l2_sq() const {
  if (l2_cache_ < 0) l2_cache_ = profile_l2_sq(unit);
  return l2_cache_;
}

double ProfileFamily::unit_grad_sq() const {
  if (grad_cache_ < 0) grad_cache_ = profile_grad_sq(unit);
  return grad_cache_;
}

ProfileFamily make_family(double p, double m, double r_max, int n) {
  ProfileFamily fam;
  fam.unit = solve_unit_profile(p, r_max, n);
  fam.m = m;
  return fam;
}

PhiPsi eval_soliton(const Eigen::Vector3d& x, const SolitonParams& lam,
                    const ProfileFamily& fam) {
  const Eigen::Vector3d z = z_coords(x, lam);
  const double r = z.norm();
  auto [f, df] = fam.eval(lam.omega, r);
  const double rho = lam.rho();
  const double th = lam.theta - lam.omega * lam.u.dot(z);
  const Complex phase = std::polar(1.0, th);
  // u . grad_z f = df * (u . z)/|z|, zero at the origin
  const double u_grad_f = r > 0 ? df * lam.u.dot(z) / r : 0.0;
  PhiPsi out;
  out.phi = phase * f;
  out.psi = phase * (Complex(0.0, rho * lam.omega * f) - rho * u_grad_f);
  return out;
}

namespace {

void check_profile(const SolitonParams& lam, const GroundStateProfile& prof) {
  if (std::abs(prof.omega - lam.omega) > 1e-12)
    throw ProfileMismatch("profile omega " + std::to_string(prof.omega) +
                          " vs lambda omega " + std::to_string(lam.omega));
}

}  // namespace

Complex eval_phi_S(const Eigen::Vector3d& x, const SolitonParams& lam,
                   const GroundStateProfile& prof) {
  check_profile(lam, prof);
  const Eigen::Vector3d z = z_coords(x, lam);
  auto [f, df] = evaluate_profile(prof, z.norm());
  (void)df;
  return std::polar(1.0, theta_phase(x, lam)) * f;
}

Complex eval_psi_S(const Eigen::Vector3d& x, const SolitonParams& lam,
                   const GroundStateProfile& prof) {
  check_profile(lam, prof);
  const Eigen::Vector3d z = z_coords(x, lam);
  const double r = z.norm();
  auto [f, df] = evaluate_profile(prof, r);
  const double rho = lam.rho();
  const double u_grad_f = r > 0 ? df * lam.u.dot(z) / r : 0.0;
  return std::polar(1.0, theta_phase(x, lam)) *
         (Complex(0.0, rho * lam.omega * f) - rho * u_grad_f);
}

namespace {

// analytic xi_k derivatives of (phi_S, psi_S); needs f'' from the profile ODE
std::array<PhiPsi, 3> d_xi_soliton(const Eigen::Vector3d& x, const SolitonParams& lam,
                                   const ProfileFamily& fam) {
  const Eigen::Matrix3d S = boost_matrix(lam);
  const Eigen::Vector3d z = z_coords(x, lam);
  const double r = z.norm();
  auto [f, df] = fam.eval(lam.omega, r);
  const double rho = lam.rho();
  const double k2 = fam.m * fam.m - lam.omega * lam.omega;
  const double p = fam.p();
  // f'' from the radial equation; series value at the origin
  const double fpp = r > 0 ? -2.0 / r * df + k2 * f - std::pow(std::abs(f), p - 1.0) * f
                           : (k2 * f - std::pow(std::abs(f), p - 1.0) * f) / 3.0;
  const double th = lam.theta - lam.omega * lam.u.dot(z);
  const Complex phase = std::polar(1.0, th);
  const Eigen::Vector3d zhat = r > 0 ? Eigen::Vector3d(z / r) : Eigen::Vector3d::Zero();
  const Eigen::Vector3d grad_f = df * zhat;
  // Hessian of f(|z|)
  Eigen::Matrix3d H;
  if (r > 0)
    H = fpp * (zhat * zhat.transpose()) +
        df / r * (Eigen::Matrix3d::Identity() - zhat * zhat.transpose());
  else
    H = ((k2 * f - std::pow(std::abs(f), p - 1.0) * f) / 3.0) * Eigen::Matrix3d::Identity();

  const double u_grad_f = lam.u.dot(grad_f);
  const Complex psi_amp = Complex(0.0, rho * lam.omega * f) - rho * u_grad_f;

  std::array<PhiPsi, 3> out;
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector3d dz = -S.col(k);               // d z / d xi_k
    const double dth = lam.omega * rho * lam.u[k];      // d Theta / d xi_k
    const double df_dir = grad_f.dot(dz);               // directional derivative of f
    const Eigen::Vector3d dgrad = H * dz;               // derivative of grad_z f
    out[k].phi = phase * (Complex(0.0, dth) * f + df_dir);
    out[k].psi = phase * (Complex(0.0, dth) * psi_amp +
                          Complex(0.0, rho * lam.omega * df_dir) - rho * lam.u.dot(dgrad));
  }
  return out;
}

constexpr double kFdStep = 1e-5;

}  // namespace

std::array<PhiPsi, 8> d_lambda_soliton(const Eigen::Vector3d& x, const SolitonParams& lam,
                                       const ProfileFamily& fam) {
  std::array<PhiPsi, 8> out;
  const PhiPsi base = eval_soliton(x, lam, fam);

  // omega: central finite difference, profile rescaled analytically inside eval
  {
    SolitonParams lp = lam, lm = lam;
    lp.omega += kFdStep;
    lm.omega -= kFdStep;
    const PhiPsi a = eval_soliton(x, lp, fam), b = eval_soliton(x, lm, fam);
    out[0].phi = (a.phi - b.phi) / (2 * kFdStep);
    out[0].psi = (a.psi - b.psi) / (2 * kFdStep);
  }
  // theta: phase derivative
  out[1].phi = Complex(0, 1) * base.phi;
  out[1].psi = Complex(0, 1) * base.psi;
  // xi: analytic chain rule
  const auto dxi = d_xi_soliton(x, lam, fam);
  for (int k = 0; k < 3; ++k) out[2 + k] = dxi[k];
  // u: central finite differences
  for (int k = 0; k < 3; ++k) {
    SolitonParams lp = lam, lm = lam;
    lp.u[k] += kFdStep;
    lm.u[k] -= kFdStep;
    const PhiPsi a = eval_soliton(x, lp, fam), b = eval_soliton(x, lm, fam);
    out[5 + k].phi = (a.phi - b.phi) / (2 * kFdStep);
    out[5 + k].psi = (a.psi - b.psi) / (2 * kFdStep);
  }
  return out;
}

Complex d_lambda_psi_dot_V(const Eigen::Vector3d& x, const SolitonParams& lam,
                           const ProfileFamily& fam) {
  // V(lambda) has nonzero entries only in the theta and xi slots, both analytic
  const PhiPsi base = eval_soliton(x, lam, fam);
  Complex acc = (lam.omega / lam.rho()) * Complex(0, 1) * base.psi;
  const auto dxi = d_xi_soliton(x, lam, fam);
  for (int k = 0; k < 3; ++k) acc += lam.u[k] * dxi[k].psi;
  return acc;
}

namespace {

// contributions below e^{-30} of the peak are dropped; |z| >= |x - xi| since
// the boost only stretches
constexpr double kImageCut = 30.0;

inline double decay_rate(const SolitonParams& lam, const ProfileFamily& fam) {
  const double k2 = fam.m * fam.m - lam.omega * lam.omega;
  return std::sqrt(k2) * fam.unit.tail_rate;
}

}  // namespace

std::vector<Eigen::Vector3d> active_image_shifts(const SolitonParams& lam,
                                                 const ProfileFamily& fam, double L) {
  std::vector<Eigen::Vector3d> shifts;
  shifts.emplace_back(Eigen::Vector3d::Zero());
  const double rate = decay_rate(lam, fam);
  for (int ax = -1; ax <= 1; ++ax)
    for (int ay = -1; ay <= 1; ++ay)
      for (int az = -1; az <= 1; ++az) {
        if (ax == 0 && ay == 0 && az == 0) continue;
        const Eigen::Vector3d shift(2 * L * ax, 2 * L * ay, 2 * L * az);
        // nearest distance from the box [-L, L)^3 to the shifted center
        const Eigen::Vector3d c = lam.xi - shift;
        double d2 = 0;
        for (int i = 0; i < 3; ++i) {
          const double d = std::max(0.0, std::abs(c[i]) - L);
          d2 += d * d;
        }
        if (rate * std::sqrt(d2) < kImageCut) shifts.push_back(-shift);
      }
  return shifts;
}

PhiPsi eval_soliton_periodic(const Eigen::Vector3d& x, const SolitonParams& lam,
                             const ProfileFamily& fam,
                             const std::vector<Eigen::Vector3d>& shifts) {
  const double rate = decay_rate(lam, fam);
  const double cut2 = kImageCut * kImageCut / (rate * rate);
  PhiPsi acc;
  for (const auto& s : shifts) {
    if (s.squaredNorm() > 0 && (x + s - lam.xi).squaredNorm() > cut2) continue;
    const PhiPsi v = eval_soliton(x + s, lam, fam);
    acc.phi += v.phi;
    acc.psi += v.psi;
  }
  return acc;
}

std::array<PhiPsi, 8> d_lambda_soliton_periodic(const Eigen::Vector3d& x,
                                                const SolitonParams& lam,
                                                const ProfileFamily& fam,
                                                const std::vector<Eigen::Vector3d>& shifts) {
  const double rate = decay_rate(lam, fam);
  const double cut2 = kImageCut * kImageCut / (rate * rate);
  std::array<PhiPsi, 8> acc{};
  for (const auto& s : shifts) {
    if (s.squaredNorm() > 0 && (x + s - lam.xi).squaredNorm() > cut2) continue;
    const auto v = d_lambda_soliton(x + s, lam, fam);
    for (int a = 0; a < 8; ++a) {
      acc[a].phi += v[a].phi;
      acc[a].psi += v[a].psi;
    }
  }
  return acc;
}

double nlw_residual(const SolitonParams& lam, const ProfileFamily& fam, const GridSpec& grid) {
  const auto shifts = active_image_shifts(lam, fam, grid.L);
  const double rate = decay_rate(lam, fam);
  const double cut2 = kImageCut * kImageCut / (rate * rate);
  const std::int64_t N = grid.size();
  CArray phi(N), contraction(N);
  const int n = grid.n;
  parallel_for(N, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
      const Eigen::Vector3d x = grid.point(ix, iy, iz);
      Complex ph = 0, ct = 0;
      for (const auto& s : shifts) {
        if (s.squaredNorm() > 0 && (x + s - lam.xi).squaredNorm() > cut2) continue;
        ph += eval_soliton(x + s, lam, fam).phi;
        ct += d_lambda_psi_dot_V(x + s, lam, fam);
      }
      phi[i] = ph;
      contraction[i] = ct;
    }
  });
  const double m2 = fam.m * fam.m;
  const double p = fam.p();
  CArray res = laplacian(phi, grid) - m2 * phi + phi.abs().pow(p - 1.0) * phi - contraction;
  return l2_norm(res, grid);
}

bool in_stability_window(const SolitonParams& lam, double m, double p) {
  if (lam.u.squaredNorm() >= 1.0) return false;
  if (!(p > 1.0 && p < 3.0)) return false;
  const double lower = (p - 1.0) / (6.0 - 2.0 * p);
  const double ratio = lam.omega * lam.omega / (m * m);
  return ratio > lower && ratio < 1.0;
}

}  // namespace mkg
