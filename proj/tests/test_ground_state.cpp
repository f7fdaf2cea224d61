#include <doctest.h>

#include <cmath>
#include <functional>

#include "mkg/ground_state.hpp"

using namespace mkg;

namespace {

// independent quadrature oracle (Simpson), separate from the library's
// trapezoid convention
double simpson_radial(const GroundStateProfile& prof,
                      const std::function<double(double, double)>& integrand) {
  const auto& r = prof.r_samples;
  const int n = int(r.size()) - 1;
  const double h = prof.dr();
  double acc = 0.0;
  for (int i = 0; i + 2 <= n; i += 2) {
    auto val = [&](int k) { return r[k] * r[k] * integrand(r[k], prof.f_samples[k]); };
    acc += h / 3.0 * (val(i) + 4.0 * val(i + 1) + val(i + 2));
  }
  return 4.0 * M_PI * acc;
}

}  // namespace

TEST_CASE("unit profile p=2 matches the reference shooting height") {
  const GroundStateProfile prof = solve_unit_profile(2.0, 30.0, 4000);
  // reference value from an independent high-accuracy integration
  CHECK(prof.f0() == doctest::Approx(4.191682954).epsilon(1e-6));
  CHECK(prof.df_samples[0] == 0.0);
  bool positive = true, decreasing = true;
  for (int i = 0; i < prof.f_samples.size(); ++i) {
    positive = positive && prof.f_samples[i] > 0;
    if (i > 0) decreasing = decreasing && prof.f_samples[i] < prof.f_samples[i - 1];
  }
  CHECK(positive);
  CHECK(decreasing);
  CHECK(prof.f_samples[prof.f_samples.size() - 1] < 1e-6 * prof.f0());
}

TEST_CASE("unit profile p=2.2 matches the reference shooting height") {
  const GroundStateProfile prof = solve_unit_profile(2.2, 30.0, 4000);
  CHECK(prof.f0() == doctest::Approx(4.186364276).epsilon(1e-6));
}

TEST_CASE("tail rate equals sqrt(m^2-omega^2) for the unit profile") {
  const GroundStateProfile prof = solve_unit_profile(2.0, 30.0, 4000);
  CHECK(prof.tail_rate > 0.99);
  CHECK(prof.tail_rate < 1.01);
  CHECK(std::abs(prof.tail_rate - 1.0) < 1e-3);
}

TEST_CASE("energy identities hold and the independent quadrature agrees") {
  for (const double p : {2.0, 2.2}) {
    const GroundStateProfile prof = solve_unit_profile(p, 30.0, 4000);
    const auto [ra, rb] = energy_identity_residuals(prof);
    CHECK(ra < 1e-4);
    CHECK(rb < 1e-4);
    // oracle: (5-p)/(2||f||^2) == (p+1)/||f||_{p+1}^{p+1} via Simpson
    const double l2 = simpson_radial(prof, [](double, double f) { return f * f; });
    const double lp1 =
        simpson_radial(prof, [p](double, double f) { return std::pow(f, p + 1.0); });
    const double lhs = (5.0 - p) / (2.0 * l2);
    const double rhs = (p + 1.0) / lp1;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
  }
}

TEST_CASE("energy identities across the stability window test matrix") {
  for (const double p : {2.0, 2.2}) {
    const GroundStateProfile unit = solve_unit_profile(p, 30.0, 4000);
    for (const double omega : {0.75, 0.8, 0.9}) {
      const GroundStateProfile prof = rescale_profile(unit, 1.0, omega);
      const auto [ra, rb] = energy_identity_residuals(prof);
      CHECK(ra < 1e-4);
      CHECK(rb < 1e-4);
    }
  }
}

TEST_CASE("a profile scaled by 2 is not a solution") {
  GroundStateProfile prof = solve_unit_profile(2.0, 30.0, 4000);
  prof.f_samples *= 2.0;
  prof.df_samples *= 2.0;
  const auto [ra, rb] = energy_identity_residuals(prof);
  CHECK(ra > 0.1);
  CHECK(rb > 0.1);
}

TEST_CASE("rescaled identities match the unit identities up to quadrature error") {
  const GroundStateProfile unit = solve_unit_profile(2.0, 30.0, 4000);
  const GroundStateProfile scaled = rescale_profile(unit, 1.0, 0.8);
  const auto [ua, ub] = energy_identity_residuals(unit);
  const auto [sa, sb] = energy_identity_residuals(scaled);
  CHECK(std::abs(ua - sa) < 1e-6);
  CHECK(std::abs(ub - sb) < 1e-6);
}

TEST_CASE("ODE residual below 1e-5 max f at every interior sample") {
  const GroundStateProfile prof = solve_unit_profile(2.0, 30.0, 8000);
  CHECK(ode_residual_max(prof) < 1e-5 * prof.f0());
}

TEST_CASE("rescaling") {
  const GroundStateProfile unit = solve_unit_profile(2.0, 30.0, 4000);

  SUBCASE("m=1, omega=0 is the identity") {
    const GroundStateProfile same = rescale_profile(unit, 1.0, 0.0);
    CHECK((same.f_samples - unit.f_samples).cwiseAbs().maxCoeff() == 0.0);
    CHECK(same.tail_rate == unit.tail_rate);
  }
  SUBCASE("m=1, omega=0.8 gives 0.36 f(0.6 r) at the sample points") {
    const GroundStateProfile w = rescale_profile(unit, 1.0, 0.8);
    CHECK(w.tail_rate == doctest::Approx(0.6 * unit.tail_rate));
    for (int i = 0; i < w.r_samples.size(); i += 500) {
      CHECK(w.r_samples[i] == doctest::Approx(unit.r_samples[i] / 0.6));
      CHECK(w.f_samples[i] == doctest::Approx(0.36 * unit.f_samples[i]));
    }
  }
  SUBCASE("L2 norm scales by change of variables") {
    const GroundStateProfile w = rescale_profile(unit, 1.0, 0.8);
    const double expected = 0.36 * 0.36 * std::pow(0.6, -3.0) * profile_l2_sq(unit);
    CHECK(profile_l2_sq(w) == doctest::Approx(expected).epsilon(1e-10));
  }
  SUBCASE("round trip reproduces the unit samples") {
    const GroundStateProfile w = rescale_profile(unit, 1.0, 0.8);
    const double k = 0.6, amp = 0.36;
    for (int i = 0; i < unit.r_samples.size(); i += 100) {
      CHECK(w.f_samples[i] / amp == doctest::Approx(unit.f_samples[i]).epsilon(1e-6));
      CHECK(w.r_samples[i] * k == doctest::Approx(unit.r_samples[i]).epsilon(1e-12));
    }
  }
  SUBCASE("rejects omega^2 >= m^2") {
    CHECK_THROWS_AS(rescale_profile(unit, 1.0, 1.0), ParameterOutOfRange);
  }
}

TEST_CASE("profile evaluation") {
  const GroundStateProfile prof = solve_unit_profile(2.0, 30.0, 4000);

  SUBCASE("origin") {
    const auto [f, df] = evaluate_profile(prof, 0.0);
    CHECK(f == prof.f0());
    CHECK(df == 0.0);
  }
  SUBCASE("knots are reproduced exactly") {
    for (const int k : {1, 17, 500, 2000, 3999}) {
      const auto [f, df] = evaluate_profile(prof, prof.r_samples[k]);
      CHECK(f == doctest::Approx(prof.f_samples[k]).epsilon(1e-13));
      CHECK(df == doctest::Approx(prof.df_samples[k]).epsilon(1e-11));
    }
  }
  SUBCASE("tail formula beyond r_max") {
    const double rmax = prof.r_max();
    const auto [f, df] = evaluate_profile(prof, 2.0 * rmax);
    const double fend = prof.f_samples[prof.f_samples.size() - 1];
    CHECK(f == doctest::Approx(fend * std::exp(-prof.tail_rate * rmax)).epsilon(1e-12));
    CHECK(df == doctest::Approx(-prof.tail_rate * f).epsilon(1e-12));
  }
  SUBCASE("seam is continuous") {
    const double rmax = prof.r_max();
    const auto below = evaluate_profile(prof, rmax * (1.0 - 1e-12));
    const auto above = evaluate_profile(prof, rmax);
    CHECK(std::abs(below.first - above.first) < 1e-8 * std::abs(above.first));
    CHECK(std::abs(below.second - above.second) < 1e-8 * std::abs(above.second));
  }
  SUBCASE("tail log-derivative approaches -sqrt(m^2-omega^2)") {
    const double rmax = prof.r_max();
    for (double r = 0.8 * rmax; r < rmax; r += 0.37) {
      const auto [f, df] = evaluate_profile(prof, r);
      CHECK(std::abs(df / f + 1.0) < 1e-3);
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(solve_unit_profile(1.0, 30.0, 4000), ParameterOutOfRange);
  CHECK_THROWS_AS(solve_unit_profile(5.0, 30.0, 4000), ParameterOutOfRange);
  CHECK_THROWS_AS(solve_unit_profile(2.0, 10.0, 4000), ParameterOutOfRange);
  CHECK_THROWS_AS(solve_unit_profile(2.0, 30.0, 100), ParameterOutOfRange);
}
