#include "mkg/evolve.hpp"

#include <cmath>

namespace mkg {

void FieldState::check_grid() const {
  const auto N = grid.size();
  if (phi.size() != N || pi.size() != N) throw GridMismatch("scalar arrays vs grid");
  for (int nu = 0; nu < 4; ++nu)
    if (a[nu].size() != N || adot[nu].size() != N)
      throw GridMismatch("connection arrays vs grid");
}

namespace {

// total connection A = A_b + tilde A at a flattened index
struct ConnectionView {
  const FieldState& s;
  int n;
  double h, L;

  explicit ConnectionView(const FieldState& st)
      : s(st), n(st.grid.n), h(st.grid.h()), L(st.grid.L) {}

  inline void components(std::int64_t i, double& a0, double& a1, double& a2,
                         double& a3) const {
    a0 = s.a[0][i];
    a1 = s.a[1][i];
    a2 = s.a[2][i];
    a3 = s.a[3][i];
    if (s.background_on()) {
      const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n);
      const double x1 = -L + h * ix, x2 = -L + h * iy;
      const double e2 = s.eps * s.eps;
      a1 += -0.5 * x2 * e2;
      a2 += 0.5 * x1 * e2;
    }
  }
};

}  // namespace

Accel acceleration(const FieldState& s, const CArray& pi_guess) {
  const GridSpec& g = s.grid;
  const std::int64_t N = g.size();
  Accel acc;
  acc.pi_dot = laplacian(s.phi, g);

  const bool coupled = s.background_on();
  std::array<CArray, 3> grad;
  if (coupled || s.maxwell_dynamic())
    for (int ax = 0; ax < 3; ++ax) grad[ax] = central_diff(s.phi, g, ax);

  const double m2 = s.m * s.m;
  const double p = s.p;
  ConnectionView A(s);

  parallel_for(N, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const Complex ph = s.phi[i];
      Complex rhs = acc.pi_dot[i] - m2 * ph + std::pow(std::abs(ph), p - 1.0) * ph;
      if (coupled) {
        double a0, a1, a2, a3;
        A.components(i, a0, a1, a2, a3);
        // b^mu d_mu phi = 2i(-A_0 d_t phi + A_j d_j phi)
        const Complex adotphi = -a0 * pi_guess[i] + a1 * grad[0][i] + a2 * grad[1][i] +
                                a3 * grad[2][i];
        rhs += Complex(0.0, 2.0) * adotphi;
        // c phi = (A_0^2 - |A_vec|^2) phi
        rhs += (a0 * a0 - a1 * a1 - a2 * a2 - a3 * a3) * ph;
      }
      acc.pi_dot[i] = rhs;
    }
  });

  if (s.maxwell_dynamic()) {
    const double coup = s.delta * s.delta * s.eps * s.eps;
    for (int nu = 0; nu < 4; ++nu) acc.a_ddot[nu] = laplacian(s.a[nu], g);
    parallel_for(N, [&](std::int64_t b, std::int64_t e) {
      for (std::int64_t i = b; i < e; ++i) {
        double a0, a1, a2, a3;
        A.components(i, a0, a1, a2, a3);
        const Complex ph = s.phi[i];
        const double ph2 = std::norm(ph);
        // J_nu = Im(phi conj(d_nu phi)) - A_nu |phi|^2
        acc.a_ddot[0][i] += coup * (std::imag(ph * std::conj(pi_guess[i])) - a0 * ph2);
        acc.a_ddot[1][i] += coup * (std::imag(ph * std::conj(grad[0][i])) - a1 * ph2);
        acc.a_ddot[2][i] += coup * (std::imag(ph * std::conj(grad[1][i])) - a2 * ph2);
        acc.a_ddot[3][i] += coup * (std::imag(ph * std::conj(grad[2][i])) - a3 * ph2);
      }
    });
  } else {
    for (int nu = 0; nu < 4; ++nu) acc.a_ddot[nu] = RArray::Zero(N);
  }
  return acc;
}

Stepper::Stepper(FieldState initial) : state_(std::move(initial)) {
  state_.check_grid();
  acc_ = acceleration(state_, state_.pi);
  blowup_limit_ = 1e3 * state_.phi.abs().maxCoeff();
  if (blowup_limit_ <= 0) blowup_limit_ = 1e3;
}

void Stepper::step() {
  const double dt = state_.grid.dt();
  const bool maxwell = state_.maxwell_dynamic();

  // kick to the half step
  state_.pi += 0.5 * dt * acc_.pi_dot;
  if (maxwell)
    for (int nu = 0; nu < 4; ++nu) state_.adot[nu] += 0.5 * dt * acc_.a_ddot[nu];
  // drift
  state_.phi += dt * state_.pi;
  if (maxwell)
    for (int nu = 0; nu < 4; ++nu) state_.a[nu] += dt * state_.adot[nu];
  state_.t += dt;

  // velocity-dependent terms: predict with the half-step velocity, then one
  // fixed-point correction
  const Accel pred = acceleration(state_, state_.pi);
  CArray pi_tilde = state_.pi + 0.5 * dt * pred.pi_dot;
  acc_ = acceleration(state_, pi_tilde);

  state_.pi += 0.5 * dt * acc_.pi_dot;
  if (maxwell)
    for (int nu = 0; nu < 4; ++nu) state_.adot[nu] += 0.5 * dt * acc_.a_ddot[nu];

  const double mx = state_.phi.abs().maxCoeff();
  if (!std::isfinite(mx) || mx > blowup_limit_)
    throw NumericBlowup("max|phi| = " + std::to_string(mx) + " at t = " +
                        std::to_string(state_.t));
}

FieldState step(const FieldState& s) {
  Stepper st(s);
  st.step();
  return st.state();
}

FieldState build_initial_data(const SolitonParams& lam0, const ProfileFamily& fam,
                              const GridSpec& grid, double eps, double delta,
                              const std::optional<Perturbation>& pert,
                              double box_fit_tol) {
  grid.validate();
  if (!in_stability_window(lam0, fam.m, fam.p()))
    throw OutsideStabilityWindow("initial soliton parameters");

  // soliton must fit in the box
  {
    const double dist = grid.L - lam0.xi.norm();
    if (dist <= 0) throw BoxTooSmall("soliton center outside the box");
    const double f_edge = fam.eval(lam0.omega, dist).first;
    const double f_center = fam.eval(lam0.omega, 0.0).first;
    if (f_edge >= box_fit_tol * f_center)
      throw BoxTooSmall("profile tail at the boundary is " +
                        std::to_string(f_edge / f_center) + " of the peak");
  }

  FieldState s;
  s.grid = grid;
  s.t = 0.0;
  s.m = fam.m;
  s.p = fam.p();
  s.eps = eps;
  s.delta = delta;

  const std::int64_t N = grid.size();
  s.phi.resize(N);
  CArray phi1(N);  // covariant D_t phi data
  const auto shifts = active_image_shifts(lam0, fam, grid.L);
  const int n = grid.n;
  parallel_for(N, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
      const PhiPsi v = eval_soliton_periodic(grid.point(ix, iy, iz), lam0, fam, shifts);
      s.phi[i] = v.phi;
      phi1[i] = v.psi;
    }
  });

  if (pert) {
    if (pert->v.size() != N || pert->w.size() != N)
      throw GridMismatch("perturbation arrays vs grid");
    if (eps > 0) {
      // weighted norm per the initial-data assumption
      std::array<CArray, 3> gv;
      for (int ax = 0; ax < 3; ++ax) gv[ax] = central_diff(pert->v, grid, ax);
      auto sums = deterministic_grid_sum(N, 1, [&](std::int64_t i, double* acc) {
        const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n),
                  iz = int(i % n);
        const double x2 = grid.point(ix, iy, iz).squaredNorm();
        double gsq = 0;
        for (int ax = 0; ax < 3; ++ax) gsq += std::norm(gv[ax][i]);
        acc[0] += (1.0 + x2) * (gsq + std::norm(pert->v[i]) + std::norm(pert->w[i]));
      });
      const double wnorm = std::sqrt(sums[0] * grid.cell_volume());
      if (wnorm > eps * (1.0 + 1e-9))
        throw ParameterOutOfRange("perturbation weighted norm " + std::to_string(wnorm) +
                                  " exceeds eps");
    }
    s.phi += pert->v;
    phi1 += pert->w;
  }

  for (int nu = 0; nu < 4; ++nu) {
    s.a[nu] = RArray::Zero(N);
    s.adot[nu] = RArray::Zero(N);
  }

  if (s.maxwell_dynamic()) {
    const double coup = delta * delta * eps * eps;
    RArray source(N);
    parallel_for(N, [&](std::int64_t b, std::int64_t e) {
      for (std::int64_t i = b; i < e; ++i)
        source[i] = -coup * std::imag(s.phi[i] * std::conj(phi1[i]));
    });
    s.a[0] = poisson_solve_periodic(source, grid);
  }

  // pi stores the plain time derivative: d_t phi = D_t phi - i A_0 phi
  s.pi.resize(N);
  parallel_for(N, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i)
      s.pi[i] = phi1[i] - Complex(0.0, s.a[0][i]) * s.phi[i];
  });
  return s;
}

CArray covariant_derivative(const FieldState& s, int mu) {
  if (mu < 0 || mu > 3) throw ParameterOutOfRange("derivative index mu");
  s.check_grid();
  const std::int64_t N = s.grid.size();
  CArray out = mu == 0 ? s.pi : central_diff(s.phi, s.grid, mu - 1);
  ConnectionView A(s);
  parallel_for(N, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      double a0, a1, a2, a3;
      A.components(i, a0, a1, a2, a3);
      const double anu = mu == 0 ? a0 : (mu == 1 ? a1 : (mu == 2 ? a2 : a3));
      out[i] += Complex(0.0, anu) * s.phi[i];
    }
  });
  return out;
}

RArray current_density_field(const FieldState& s, int nu) {
  const CArray d = covariant_derivative(s, nu);
  const std::int64_t N = s.grid.size();
  RArray out(N);
  parallel_for(N, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) out[i] = std::imag(s.phi[i] * std::conj(d[i]));
  });
  return out;
}

EBFields field_strength(const FieldState& s) {
  s.check_grid();
  EBFields f;
  // E_i = d_i A_0 - d_t A_i; the background has (A_b)_0 = 0 and is static
  for (int i = 0; i < 3; ++i) f.E[i] = central_diff(s.a[0], s.grid, i) - s.adot[i + 1];
  // B = curl A; background adds the constant (0, 0, eps^2) exactly
  f.B[0] = central_diff(s.a[3], s.grid, 1) - central_diff(s.a[2], s.grid, 2);
  f.B[1] = central_diff(s.a[1], s.grid, 2) - central_diff(s.a[3], s.grid, 0);
  f.B[2] = central_diff(s.a[2], s.grid, 0) - central_diff(s.a[1], s.grid, 1);
  if (s.background_on()) f.B[2] += s.eps * s.eps;
  return f;
}

double gauge_residual(const FieldState& s) {
  s.check_grid();
  RArray g = -s.adot[0];
  for (int j = 0; j < 3; ++j) g += central_diff(s.a[j + 1], s.grid, j);
  return l2_norm(g, s.grid);
}

double initial_constraint_residual(const FieldState& s) {
  s.check_grid();
  const std::int64_t N = s.grid.size();
  // div E = Lap A0 - d_i adot_i; the Laplacian form keeps the Nyquist modes
  // (an even-order symbol), matching the Poisson construction exactly
  RArray div_e = spectral_laplacian(s.a[0], s.grid);
  for (int i = 0; i < 3; ++i) div_e -= spectral_diff(s.adot[i + 1], s.grid, i);
  const double coup = s.delta * s.delta * s.eps * s.eps;
  RArray j0 = current_density_field(s, 0);
  const double mean = pairwise_sum(j0) / double(N);
  RArray res = div_e + coup * (j0 - mean);
  return l2_norm(res, s.grid);
}

}  // namespace mkg
