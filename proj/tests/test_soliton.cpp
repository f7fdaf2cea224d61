#include <doctest.h>

#include <cmath>
#include <random>

#include "mkg/soliton.hpp"

using namespace mkg;

namespace {

const ProfileFamily& family_p2() {
  static const ProfileFamily fam = make_family(2.0, 1.0);
  return fam;
}

SolitonParams random_window_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SolitonParams lam;
  lam.omega = 0.75 + 0.1 * std::abs(unif(rng));
  lam.theta = 2.0 * unif(rng);
  lam.xi = Eigen::Vector3d(unif(rng), unif(rng), unif(rng));
  lam.u = 0.4 * Eigen::Vector3d(unif(rng), unif(rng), unif(rng));
  return lam;
}

}  // namespace

TEST_CASE("boosted coordinates") {
  SolitonParams lam;
  SUBCASE("identity at u = 0") {
    const Eigen::Vector3d x(0.3, -1.2, 2.0);
    CHECK((z_coords(x, lam) - x).norm() == 0.0);
  }
  SUBCASE("parallel component stretches by rho") {
    lam.u = Eigen::Vector3d(0, 0, 0.6);
    const Eigen::Vector3d z = z_coords(Eigen::Vector3d(0, 0, 1), lam);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
    CHECK(z[2] == doctest::Approx(1.25).epsilon(1e-14));
  }
  SUBCASE("perpendicular component unchanged") {
    lam.u = Eigen::Vector3d(0, 0, 0.6);
    const Eigen::Vector3d z = z_coords(Eigen::Vector3d(1, 0, 0), lam);
    CHECK((z - Eigen::Vector3d(1, 0, 0)).norm() == 0.0);
  }
}

TEST_CASE("phase function") {
  SolitonParams lam;
  SUBCASE("u = 0 gives theta everywhere") {
    lam.theta = 0.7;
    CHECK(theta_phase(Eigen::Vector3d(1, 2, 3), lam) == 0.7);
  }
  SUBCASE("tabulated value") {
    lam.theta = 0.0;
    lam.omega = 0.8;
    lam.u = Eigen::Vector3d(0, 0, 0.6);
    CHECK(theta_phase(Eigen::Vector3d(0, 0, 1), lam) ==
          doctest::Approx(-0.6).epsilon(1e-14));
  }
  SUBCASE("translation covariance over random draws") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
      SolitonParams lam2 = random_window_params(rng);
      const Eigen::Vector3d x(unif(rng), unif(rng), unif(rng));
      const Eigen::Vector3d a(unif(rng), unif(rng), unif(rng));
      SolitonParams shifted = lam2;
      shifted.xi += a;
      CHECK(theta_phase(x + a, shifted) ==
            doctest::Approx(theta_phase(x, lam2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("soliton evaluation") {
  const ProfileFamily& fam = family_p2();

  SUBCASE("rest soliton at the origin") {
    SolitonParams lam;
    lam.omega = 0.8;
    const Eigen::Vector3d x(0.5, 0.2, -0.8);
    const PhiPsi v = eval_soliton(x, lam, fam);
    const double f = fam.eval(0.8, x.norm()).first;
    CHECK(std::real(v.phi) == doctest::Approx(f).epsilon(1e-14));
    CHECK(std::imag(v.phi) == doctest::Approx(0.0));
    CHECK(std::real(v.psi) == doctest::Approx(0.0));
    CHECK(std::imag(v.psi) == doctest::Approx(0.8 * f).epsilon(1e-14));
  }
  SUBCASE("|phi_S| equals the profile at |z| for random parameters") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (int k = 0; k < 50; ++k) {
      const SolitonParams lam = random_window_params(rng);
      const Eigen::Vector3d x(unif(rng), unif(rng), unif(rng));
      const double expected = fam.eval(lam.omega, z_coords(x, lam).norm()).first;
      CHECK(std::abs(eval_soliton(x, lam, fam).phi) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("profile mismatch is rejected") {
    SolitonParams lam;
    lam.omega = 0.8;
    const GroundStateProfile wrong = rescale_profile(fam.unit, 1.0, 0.75);
    CHECK_THROWS_AS(eval_phi_S(Eigen::Vector3d::Zero(), lam, wrong), ProfileMismatch);
  }
  SUBCASE("spec-facing evaluators agree with the family path") {
    SolitonParams lam;
    lam.omega = 0.8;
    lam.theta = 0.4;
    lam.u = Eigen::Vector3d(0.1, 0, 0.3);
    const GroundStateProfile prof = rescale_profile(fam.unit, 1.0, 0.8);
    const Eigen::Vector3d x(1.0, -0.5, 0.25);
    const PhiPsi v = eval_soliton(x, lam, fam);
    CHECK(std::abs(eval_phi_S(x, lam, prof) - v.phi) < 1e-13);
    CHECK(std::abs(eval_psi_S(x, lam, prof) - v.psi) < 1e-13);
  }
}

TEST_CASE("soliton transport: d_t phi_S equals psi_S under the free flow") {
  // lambda(t) follows dot(lambda) = V(lambda): omega, u frozen,
  // theta(t) = theta + omega/rho t, xi(t) = xi + u t
  const ProfileFamily& fam = family_p2();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (int k = 0; k < 5; ++k) {
    const SolitonParams lam = random_window_params(rng);
    const Eigen::Vector3d x(unif(rng), unif(rng), unif(rng));
    auto phi_at = [&](double t) {
      SolitonParams lt = lam;
      lt.theta = lam.theta + lam.omega / lam.rho() * t;
      lt.xi = lam.xi + lam.u * t;
      return eval_soliton(x, lt, fam).phi;
    };
    const double h = 1e-3;
    const Complex dphi =
        (-phi_at(2 * h) + 8.0 * phi_at(h) - 8.0 * phi_at(-h) + phi_at(-2 * h)) / (12.0 * h);
    const Complex psi = eval_soliton(x, lam, fam).psi;
    CHECK(std::abs(dphi - psi) < 1e-7 * (1.0 + std::abs(psi)));
  }
}

TEST_CASE("parameter derivatives") {
  const ProfileFamily& fam = family_p2();

  SUBCASE("theta derivative is i phi_S exactly") {
    std::mt19937_64 rng(3);
    const SolitonParams lam = random_window_params(rng);
    const Eigen::Vector3d x(0.4, 1.1, -0.6);
    const auto d = d_lambda_soliton(x, lam, fam);
    const PhiPsi base = eval_soliton(x, lam, fam);
    CHECK(std::abs(d[1].phi - Complex(0, 1) * base.phi) < 1e-15);
    CHECK(std::abs(d[1].psi - Complex(0, 1) * base.psi) < 1e-15);
  }
  SUBCASE("xi derivative at u = 0 is the plain gradient") {
    SolitonParams lam;
    lam.omega = 0.8;
    lam.theta = 0.3;
    lam.xi = Eigen::Vector3d(0.2, 0, -0.1);
    const Eigen::Vector3d x(1.0, 0.7, 0.4);
    const auto d = d_lambda_soliton(x, lam, fam);
    const Eigen::Vector3d dvec = x - lam.xi;
    const double df = fam.eval(0.8, dvec.norm()).second;
    for (int k = 0; k < 3; ++k) {
      const Complex expected = -std::polar(1.0, lam.theta) * df * dvec[k] / dvec.norm();
      CHECK(std::abs(d[2 + k].phi - expected) < 1e-12);
    }
  }
  SUBCASE("contraction identity psi_S = d_lambda phi_S . V at random points") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int k = 0; k < 20; ++k) {
      const SolitonParams lam = random_window_params(rng);
      const Eigen::Vector3d x(unif(rng), unif(rng), unif(rng));
      const auto d = d_lambda_soliton(x, lam, fam);
      const Lambda8 V = V_lambda(lam);
      Complex contraction = 0;
      for (int a = 0; a < 8; ++a) contraction += V[a] * d[a].phi;
      const Complex psi = eval_soliton(x, lam, fam).psi;
      CHECK(std::abs(contraction - psi) < 1e-6 * (1.0 + std::abs(psi)));
    }
  }
  SUBCASE("analytic psi contraction helper agrees") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int k = 0; k < 10; ++k) {
      const SolitonParams lam = random_window_params(rng);
      const Eigen::Vector3d x(unif(rng), unif(rng), unif(rng));
      const auto d = d_lambda_soliton(x, lam, fam);
      const Lambda8 V = V_lambda(lam);
      Complex contraction = 0;
      for (int a = 0; a < 8; ++a) contraction += V[a] * d[a].psi;
      const Complex helper = d_lambda_psi_dot_V(x, lam, fam);
      CHECK(std::abs(contraction - helper) < 1e-6 * (1.0 + std::abs(helper)));
    }
  }
}

TEST_CASE("Lorentz contraction of the L2 mass") {
  const ProfileFamily& fam = family_p2();
  SolitonParams lam;
  lam.omega = 0.8;
  lam.u = Eigen::Vector3d(0, 0, 0.5);
  const GridSpec grid{14.0, 56, 0.45};
  const auto shifts = active_image_shifts(lam, fam, grid.L);
  double acc = 0;
  for (int ix = 0; ix < grid.n; ++ix)
    for (int iy = 0; iy < grid.n; ++iy)
      for (int iz = 0; iz < grid.n; ++iz)
        acc += std::norm(
            eval_soliton_periodic(grid.point(ix, iy, iz), lam, fam, shifts).phi);
  const double mass_dx = acc * grid.cell_volume();
  const GroundStateProfile prof = rescale_profile(fam.unit, 1.0, 0.8);
  const double mass_dz = profile_l2_sq(prof);
  CHECK(mass_dx == doctest::Approx(mass_dz / lam.rho()).epsilon(1e-3));
}

TEST_CASE("nonlinear wave identity residual") {
  const ProfileFamily& fam = family_p2();
  SolitonParams lam;
  lam.omega = 0.8;
  lam.u = Eigen::Vector3d(0, 0, 0.3);

  SUBCASE("second order in h") {
    const double r1 = nlw_residual(lam, fam, GridSpec{12.0, 32, 0.45});
    const double r2 = nlw_residual(lam, fam, GridSpec{12.0, 64, 0.45});
    CHECK(r1 / r2 > 3.2);
    CHECK(r1 / r2 < 4.8);
  }
  SUBCASE("u = 0 gives the static elliptic residual") {
    SolitonParams rest;
    rest.omega = 0.8;
    const GridSpec grid{12.0, 48, 0.45};
    const double res = nlw_residual(rest, fam, grid);
    const auto shifts = active_image_shifts(rest, fam, grid.L);
    CArray f(grid.size());
    const int n = grid.n;
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz)
          f[grid.idx(ix, iy, iz)] =
              eval_soliton_periodic(grid.point(ix, iy, iz), rest, fam, shifts).phi;
    const double k2 = 1.0 - 0.64;
    CArray static_res = laplacian(f, grid) - k2 * f + f.abs() * f;
    CHECK(res == doctest::Approx(l2_norm(static_res, grid)).epsilon(1e-10));
  }
  SUBCASE("corrupted profile gives an O(1) residual") {
    ProfileFamily bad = fam;
    bad.unit.f_samples *= 1.1;
    bad.unit.df_samples *= 1.1;
    const double res_good = nlw_residual(lam, fam, GridSpec{12.0, 48, 0.45});
    const double res_bad = nlw_residual(lam, bad, GridSpec{12.0, 48, 0.45});
    CHECK(res_bad > 4.0 * res_good);
    CHECK(res_bad > 0.3);
  }
}

TEST_CASE("stability window") {
  SolitonParams lam;
  lam.omega = 0.8;
  CHECK(in_stability_window(lam, 1.0, 2.0));
  lam.omega = 0.6;
  CHECK(!in_stability_window(lam, 1.0, 2.0));
  lam.omega = 1.0;
  CHECK(!in_stability_window(lam, 1.0, 2.0));
  lam.omega = 0.8;
  lam.u = Eigen::Vector3d(0, 0, 1.0);
  CHECK(!in_stability_window(lam, 1.0, 2.0));
}
