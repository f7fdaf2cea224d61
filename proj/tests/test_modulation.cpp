#include <doctest.h>

#include <cmath>
#include <random>

#include "mkg/evolve.hpp"
#include "mkg/modulation.hpp"

#include "helpers.hpp"

using namespace mkg;

namespace {

const ProfileFamily& family_a4() {
  static const ProfileFamily fam = make_family(2.0, 1.76);
  return fam;
}

SolitonParams lam_star() {
  SolitonParams lam;
  lam.omega = 0.98 * 1.76;
  lam.theta = 0.3;
  lam.xi = Eigen::Vector3d(0.2, -0.1, 0.4);
  lam.u = Eigen::Vector3d(0.02, 0.0, 0.25);
  return lam;
}

FieldState soliton_state(const SolitonParams& lam, const GridSpec& grid,
                         const ProfileFamily& fam) {
  FieldState s;
  s.grid = grid;
  s.m = fam.m;
  s.p = fam.p();
  const std::int64_t N = grid.size();
  s.phi.resize(N);
  s.pi.resize(N);
  for (int nu = 0; nu < 4; ++nu) {
    s.a[nu] = RArray::Zero(N);
    s.adot[nu] = RArray::Zero(N);
  }
  const auto shifts = active_image_shifts(lam, fam, grid.L);
  for (int ix = 0; ix < grid.n; ++ix)
    for (int iy = 0; iy < grid.n; ++iy)
      for (int iz = 0; iz < grid.n; ++iz) {
        const PhiPsi v = eval_soliton_periodic(grid.point(ix, iy, iz), lam, fam, shifts);
        const std::int64_t i = grid.idx(ix, iy, iz);
        s.phi[i] = v.phi;
        s.pi[i] = v.psi;
      }
  return s;
}

// even real bump in the rotated frame, added to an exact soliton state
FieldState perturbed_state(const SolitonParams& lam, const GridSpec& grid,
                           const ProfileFamily& fam, double amp) {
  FieldState s = soliton_state(lam, grid, fam);
  for (int ix = 0; ix < grid.n; ++ix)
    for (int iy = 0; iy < grid.n; ++iy)
      for (int iz = 0; iz < grid.n; ++iz) {
        const Eigen::Vector3d x = grid.point(ix, iy, iz);
        const double g = amp * std::exp(-(x - lam.xi).squaredNorm() / 4.0);
        const std::int64_t i = grid.idx(ix, iy, iz);
        s.phi[i] += std::polar(1.0, theta_phase(x, lam)) * g;
      }
  return s;
}

}  // namespace

TEST_CASE("fit on exact soliton data returns the parameters unchanged") {
  const ProfileFamily& fam = family_a4();
  const GridSpec grid{16.0, 32, 0.45};
  const SolitonParams lam = lam_star();
  const FieldState s = soliton_state(lam, grid, fam);
  const ModulationRecord rec = fit_lambda(s, fam, lam);
  CHECK(rec.orth_residual < 1e-10);
  CHECK((pack_lambda(rec.lam) - pack_lambda(lam)).norm() < 1e-10);
  CHECK(rec.v_h1 < 1e-10);
  CHECK(rec.w_l2 < 1e-10);
}

TEST_CASE("fit recovers a perturbed-guess start and measures the remainder") {
  const ProfileFamily& fam = family_a4();
  const GridSpec grid{16.0, 32, 0.45};
  const SolitonParams lam = lam_star();
  const double amp = 0.02;
  const FieldState s = perturbed_state(lam, grid, fam, amp);
  // perturbation norm in L2
  double pnorm;
  {
    double acc = 0;
    for (int ix = 0; ix < grid.n; ++ix)
      for (int iy = 0; iy < grid.n; ++iy)
        for (int iz = 0; iz < grid.n; ++iz) {
          const Eigen::Vector3d x = grid.point(ix, iy, iz);
          const double g = amp * std::exp(-(x - lam.xi).squaredNorm() / 4.0);
          acc += g * g;
        }
    pnorm = std::sqrt(acc * grid.cell_volume());
  }
  SolitonParams guess = lam;
  guess.theta += 0.01;
  const ModulationRecord rec = fit_lambda(s, fam, guess);
  CHECK(rec.orth_residual < 1e-8);
  // the fitted lambda stays near lam and the remainder carries the bump
  CHECK((pack_lambda(rec.lam) - pack_lambda(lam)).norm() < 0.05);
  const double vl2 = std::sqrt(rec.v_h1 * rec.v_h1 -
                               0.0);  // v_h1 >= v_l2; compare loosely below
  CHECK(rec.v_h1 > 0.5 * pnorm);
  (void)vl2;
  // L2 part of the remainder matches the injected bump to 5%
  CArray v, w;
  remainder_fields(s, fam, rec.lam, v, w);
  CHECK(l2_norm(v, grid) == doctest::Approx(pnorm).epsilon(0.05));
}

TEST_CASE("fit is idempotent") {
  const ProfileFamily& fam = family_a4();
  const GridSpec grid{16.0, 32, 0.45};
  const SolitonParams lam = lam_star();
  const FieldState s = perturbed_state(lam, grid, fam, 0.02);
  SolitonParams guess = lam;
  guess.omega += 0.005;
  const ModulationRecord rec1 = fit_lambda(s, fam, guess);
  const ModulationRecord rec2 = fit_lambda(s, fam, rec1.lam);
  CHECK((pack_lambda(rec2.lam) - pack_lambda(rec1.lam)).norm() < 1e-10);
}

TEST_CASE("initial-data fit shift scales linearly with the perturbation size") {
  const ProfileFamily& fam = family_a4();
  const GridSpec grid{16.0, 32, 0.45};
  const SolitonParams lam = lam_star();
  std::vector<double> shift;
  for (const double eps : {0.05, 0.1, 0.2}) {
    const FieldState s = perturbed_state(lam, grid, fam, eps);
    const ModulationRecord rec = fit_lambda(s, fam, lam);
    shift.push_back((pack_lambda(rec.lam) - pack_lambda(lam)).norm());
  }
  CHECK(shift[0] < shift[1]);
  CHECK(shift[1] < shift[2]);
  const double r1 = shift[0] / 0.05, r2 = shift[1] / 0.1, r3 = shift[2] / 0.2;
  const double rmax = std::max({r1, r2, r3}), rmin = std::min({r1, r2, r3});
  CHECK(rmax / rmin < 3.0);
}

TEST_CASE("leading modulation matrix") {
  const ProfileFamily& fam = family_a4();

  SUBCASE("antisymmetry is exact") {
    const Matrix8 M = assemble_M0(lam_star(), fam);
    CHECK((M + M.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("u = 0 blocks") {
    SolitonParams lam;
    lam.omega = 0.98 * 1.76;
    const Matrix8 M = assemble_M0(lam, fam);
    const double G = G_scaled(fam, lam.omega);
    for (int k = 0; k < 3; ++k) {
      CHECK(M(0, 2 + k) == 0.0);  // (omega, xi) vanishes at u = 0
      for (int j = 0; j < 3; ++j)
        CHECK(M(2 + j, 5 + k) == doctest::Approx(j == k ? -G : 0.0));
    }
  }
  SUBCASE("determinant matches the closed form at window points") {
    for (const double ratio : {0.75, 0.8, 0.85, 0.9, 0.95, 0.98}) {
      SolitonParams lam = lam_star();
      lam.omega = ratio * fam.m;
      const double det = assemble_M0(lam, fam).determinant();
      const double dwn = d_omega_omega_norm_sq(fam, lam.omega);
      const double G = G_scaled(fam, lam.omega);
      const double rho = lam.rho();
      const double closed = dwn * dwn * std::pow(G, 6.0) * std::pow(rho, 10.0);
      CHECK(det == doctest::Approx(closed).epsilon(1e-6));
      CHECK(det > 0.0);
    }
  }
  SUBCASE("the omega-theta factor changes sign at the window boundary") {
    // d_omega(omega ||f||^2) vanishes at omega^2/m^2 = (p-1)/(6-2p) = 1/2
    const double boundary = fam.m / std::sqrt(2.0);
    CHECK(d_omega_omega_norm_sq(fam, boundary * 1.02) < 0.0);
    CHECK(d_omega_omega_norm_sq(fam, boundary * 0.98) > 0.0);
  }
}

TEST_CASE("error matrix M1") {
  const ProfileFamily& fam = family_a4();
  const GridSpec grid{16.0, 32, 0.45};
  const SolitonParams lam = lam_star();

  SUBCASE("vanishes on exact soliton data") {
    const FieldState s = soliton_state(lam, grid, fam);
    const Matrix8 M1 = assemble_M1(s, fam, lam);
    const Matrix8 M0 = assemble_M0(lam, fam);
    CHECK(M1.cwiseAbs().maxCoeff() < 1e-8 * M0.cwiseAbs().maxCoeff());
  }
  SUBCASE("linear in the remainder") {
    const FieldState s1 = perturbed_state(lam, grid, fam, 0.02);
    const FieldState s2 = perturbed_state(lam, grid, fam, 0.04);
    const Matrix8 M1a = assemble_M1(s1, fam, lam);
    const Matrix8 M1b = assemble_M1(s2, fam, lam);
    CHECK((M1b - 2.0 * M1a).cwiseAbs().maxCoeff() < 1e-6 * M1b.cwiseAbs().maxCoeff() + 1e-12);
  }
  SUBCASE("norm is controlled by the remainder norms") {
    // the constant is recorded, not asserted: it grows like the stiffness of
    // the family in omega, which is large close to omega = m
    std::mt19937_64 rng(31);
    double ratio_max = 0, ratio_min = 1e300;
    for (int trial = 0; trial < 3; ++trial) {
      FieldState s = soliton_state(lam, grid, fam);
      const CArray dv = 0.01 * mkg_test::smooth_random_field(grid, rng, 3.0);
      const CArray dw = 0.01 * mkg_test::smooth_random_field(grid, rng, 3.0);
      s.phi += dv;
      s.pi += dw;
      const Matrix8 M1 = assemble_M1(s, fam, lam);
      const double denom = l2_norm(dv, grid) + l2_norm(dw, grid);
      ratio_max = std::max(ratio_max, M1.cwiseAbs().maxCoeff() / denom);
      ratio_min = std::min(ratio_min, M1.cwiseAbs().maxCoeff() / denom);
    }
    MESSAGE("M1 to remainder ratio in [", ratio_min, ", ", ratio_max, "]");
    CHECK(std::isfinite(ratio_max));
    CHECK(ratio_max < 1e4);
  }
}

TEST_CASE("G(omega) by quadrature") {
  const ProfileFamily& fam = family_a4();

  SUBCASE("omega = 0 leaves only the gradient term") {
    const double G = G_of_omega(fam.unit);
    CHECK(G == doctest::Approx(profile_grad_sq(fam.unit) / 3.0));
    CHECK(G > 0.0);
  }
  SUBCASE("quadrature matches the scaling-law value across the window") {
    for (const double ratio : {0.8, 0.9, 0.98}) {
      const double omega = ratio * fam.m;
      const GroundStateProfile prof = rescale_profile(fam.unit, fam.m, omega);
      CHECK(G_of_omega(prof) == doctest::Approx(G_scaled(fam, omega)).epsilon(1e-8));
      CHECK(G_of_omega(prof) > 0.0);
    }
  }
}

TEST_CASE("modulation residual on exact transport records") {
  const ProfileFamily& fam = family_a4();
  SolitonParams lam = lam_star();
  std::vector<ModulationRecord> records;
  const double dt = 0.5;
  for (int k = 0; k < 7; ++k) {
    ModulationRecord rec;
    rec.t = dt * k;
    rec.lam = lam;
    rec.lam.theta = lam.theta + lam.omega / lam.rho() * rec.t;
    rec.lam.xi = lam.xi + lam.u * rec.t;
    records.push_back(rec);
  }
  const auto norms = modulation_residual(records);
  for (const double n : norms) CHECK(n < 1e-12);

  std::vector<ModulationRecord> two(records.begin(), records.begin() + 2);
  CHECK_THROWS_AS(modulation_residual(two), InsufficientSamples);
}

TEST_CASE("modulation forcing vanishes on a flat exact soliton") {
  const ProfileFamily& fam = family_a4();
  const GridSpec grid{16.0, 32, 0.45};
  const SolitonParams lam = lam_star();
  const FieldState s = soliton_state(lam, grid, fam);
  const Lambda8 K = modulation_forcing(s, fam, lam);
  CHECK(K.cwiseAbs().maxCoeff() < 1e-10);
}
