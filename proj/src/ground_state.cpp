#include "mkg/ground_state.hpp"

#include <algorithm>
#include <cmath>

namespace mkg {

namespace {

struct ShotResult {
  Eigen::VectorXd f, df;
  bool crossed = false;   // f hit zero
  bool diverged = false;  // f turned back up or blew past 1.5 f(0)
  int event_index = -1;   // first untrustworthy sample
};

// RK4 on (f, f') for f'' = -(2/r) f' + f - |f|^{p-1} f (unit normalization),
// first two samples from the series f = f0 + f2 r^2 + f4 r^4
ShotResult integrate_unit(double s, double p, double r_max, int n) {
  const double h = r_max / n;
  ShotResult out;
  out.f.resize(n + 1);
  out.df.resize(n + 1);
  const double f2 = (s - std::pow(s, p)) / 6.0;
  const double f4 = f2 * (1.0 - p * std::pow(s, p - 1)) / 20.0;
  out.f[0] = s;
  out.df[0] = 0.0;
  for (int i = 1; i <= 2; ++i) {
    const double r = h * i;
    out.f[i] = s + f2 * r * r + f4 * r * r * r * r;
    out.df[i] = 2.0 * f2 * r + 4.0 * f4 * r * r * r;
  }
  auto rhs = [p](double r, double f, double df, double& of, double& odf) {
    of = df;
    odf = -2.0 / r * df + f - std::pow(std::abs(f), p - 1) * f;
  };
  double f = out.f[2], df = out.df[2];
  int i = 2;
  for (; i < n; ++i) {
    const double r = h * i;
    double k1f, k1d, k2f, k2d, k3f, k3d, k4f, k4d;
    rhs(r, f, df, k1f, k1d);
    rhs(r + 0.5 * h, f + 0.5 * h * k1f, df + 0.5 * h * k1d, k2f, k2d);
    rhs(r + 0.5 * h, f + 0.5 * h * k2f, df + 0.5 * h * k2d, k3f, k3d);
    rhs(r + h, f + h * k3f, df + h * k3d, k4f, k4d);
    f += h / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f);
    df += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
    out.f[i + 1] = f;
    out.df[i + 1] = df;
    if (!std::isfinite(f) || f > 1.5 * s) {
      out.diverged = true;
      out.event_index = i + 1;
      break;
    }
    if (f <= 0.0) {
      out.crossed = true;
      out.event_index = i + 1;
      break;
    }
    if (i > 8 && out.f[i + 1] > out.f[i]) {
      out.diverged = true;
      out.event_index = i + 1;
      break;
    }
  }
  if (out.event_index < 0) out.event_index = n + 1;
  return out;
}

}  // namespace

GroundStateProfile solve_unit_profile(double p, double r_max, int n) {
  if (!(p > 1.0 && p < 5.0)) throw ParameterOutOfRange("exponent p must lie in (1,5)");
  if (r_max < 20.0) throw ParameterOutOfRange("r_max must be >= 20");
  if (n < 2000) throw ParameterOutOfRange("n must be >= 2000");

  // bracket: grow s until the shot crosses zero; the last non-crossing s is
  // the divergence side
  double lo = -1.0, hi = -1.0;
  {
    double s = 1.2;
    for (int it = 0; it < 80 && hi < 0; ++it) {
      ShotResult r = integrate_unit(s, p, r_max, n);
      if (r.crossed)
        hi = s;
      else
        lo = s;
      s *= 1.3;
    }
    if (hi < 0 || lo < 0)
      throw BracketingFailure("no sign change in shooting behavior for p=" + std::to_string(p));
  }

  const int iteration_cap = 200;
  int it = 0;
  for (; it < iteration_cap; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;  // interval collapsed to machine precision
    ShotResult r = integrate_unit(mid, p, r_max, n);
    if (r.crossed)
      hi = mid;
    else
      lo = mid;
  }
  if (it >= iteration_cap) throw NonConvergence("shooting bisection exceeded iteration cap");

  const double s = 0.5 * (lo + hi);
  ShotResult shot = integrate_unit(s, p, r_max, n);

  GroundStateProfile prof;
  prof.m = 1.0;
  prof.omega = 0.0;
  prof.p = p;
  const double h = r_max / n;
  prof.r_samples = Eigen::VectorXd::LinSpaced(n + 1, 0.0, r_max);
  prof.f_samples = shot.f;
  prof.df_samples = shot.df;

  // trusted region: contiguous, positive, monotone decreasing, above the
  // roundoff contamination floor
  int trust_end = std::min(shot.event_index, n + 1);
  for (int i = 1; i < trust_end; ++i) {
    if (shot.f[i] <= 1e-10 * s || shot.f[i] >= shot.f[i - 1]) {
      trust_end = i;
      break;
    }
  }
  if (trust_end < n / 4)
    throw NonConvergence("trusted region of the shooting solution is too short");

  // tail rate: the linear radial equation has the exact solution e^{-kr}/r,
  // so fit log(r f) = log C - k r on a window inside the trusted region
  int w_lo = -1, w_hi = -1;
  for (int i = 1; i < trust_end; ++i) {
    if (w_lo < 0 && shot.f[i] < 1e-4 * s) w_lo = i;
    if (shot.f[i] < 1e-7 * s) {
      w_hi = i;
      break;
    }
  }
  if (w_lo < 0 || w_hi < 0 || w_hi - w_lo < 16) {
    // fallback: last 10% of the trusted samples
    w_hi = trust_end - 1;
    w_lo = std::max(1, trust_end - 1 - n / 10);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int cnt = w_hi - w_lo + 1;
  for (int i = w_lo; i <= w_hi; ++i) {
    const double x = prof.r_samples[i];
    const double y = std::log(x * shot.f[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  prof.tail_rate = -slope;
  if (!(prof.tail_rate > 0)) throw NonConvergence("tail fit produced a non-decaying rate");

  // replace everything past the seam by the pure exponential with the fitted
  // rate; the seam sits at f ~ 1e-7 f(0) where the replacement kink is far
  // below the ODE-residual tolerance
  const int seam = w_hi;
  for (int i = seam; i <= n; ++i) {
    const double r = prof.r_samples[i];
    prof.f_samples[i] = shot.f[seam] * std::exp(-prof.tail_rate * (r - prof.r_samples[seam]));
    prof.df_samples[i] = -prof.tail_rate * prof.f_samples[i];
  }
  (void)h;
  return prof;
}

GroundStateProfile rescale_profile(const GroundStateProfile& unit, double m, double omega) {
  const double k2 = m * m - omega * omega;
  if (k2 <= 0) throw ParameterOutOfRange("need omega^2 < m^2");
  const double k = std::sqrt(k2);
  const double amp = std::pow(k2, 1.0 / (unit.p - 1.0));
  GroundStateProfile out;
  out.m = m;
  out.omega = omega;
  out.p = unit.p;
  out.r_samples = unit.r_samples / k;
  out.f_samples = amp * unit.f_samples;
  out.df_samples = amp * k * unit.df_samples;
  out.tail_rate = k * unit.tail_rate;
  return out;
}

namespace {

double radial_quadrature(const GroundStateProfile& prof, const Eigen::VectorXd& integrand) {
  // trapezoid on r^2 * integrand times 4*pi; the shared convention
  const double dr = prof.dr();
  const auto& r = prof.r_samples;
  double acc = 0.0;
  for (int i = 0; i + 1 < r.size(); ++i) {
    const double a = r[i] * r[i] * integrand[i];
    const double b = r[i + 1] * r[i + 1] * integrand[i + 1];
    acc += 0.5 * (a + b) * dr;
  }
  return 4.0 * M_PI * acc;
}

}  // namespace

double profile_l2_sq(const GroundStateProfile& prof) {
  return radial_quadrature(prof, prof.f_samples.array().square().matrix());
}

double profile_grad_sq(const GroundStateProfile& prof) {
  return radial_quadrature(prof, prof.df_samples.array().square().matrix());
}

double profile_lp1(const GroundStateProfile& prof) {
  Eigen::VectorXd v = prof.f_samples.array().abs().pow(prof.p + 1.0).matrix();
  return radial_quadrature(prof, v);
}

std::pair<double, double> energy_identity_residuals(const GroundStateProfile& prof) {
  const double k2 = prof.mass_gap2();
  const double p = prof.p;
  const double q1 = 3.0 * (p - 1.0) * k2 / (2.0 * profile_grad_sq(prof));
  const double q2 = (5.0 - p) / (2.0 * profile_l2_sq(prof));
  const double q3 = (p + 1.0) * k2 / profile_lp1(prof);
  // q3 as the reference: q1/q2 alone is invariant under amplitude scaling,
  // so comparing both against q3 keeps the residuals sensitive to
  // non-solutions
  return {std::abs(q1 / q3 - 1.0), std::abs(q2 / q3 - 1.0)};
}

std::pair<double, double> evaluate_profile(const GroundStateProfile& prof, double r) {
  if (r < 0) throw ParameterOutOfRange("radius must be non-negative");
  const double rmax = prof.r_max();
  if (r >= rmax) {
    const double fend = prof.f_samples[prof.f_samples.size() - 1];
    const double f = fend * std::exp(-prof.tail_rate * (r - rmax));
    return {f, -prof.tail_rate * f};
  }
  const double dr = prof.dr();
  int i = int(r / dr);
  if (i >= prof.r_samples.size() - 1) i = int(prof.r_samples.size()) - 2;
  const double t = (r - prof.r_samples[i]) / dr;
  const double f0 = prof.f_samples[i], f1 = prof.f_samples[i + 1];
  const double d0 = prof.df_samples[i] * dr, d1 = prof.df_samples[i + 1] * dr;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double f = h00 * f0 + h10 * d0 + h01 * f1 + h11 * d1;
  const double df = ((6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * d0 +
                     (-6 * t2 + 6 * t) * f1 + (3 * t2 - 2 * t) * d1) /
                    dr;
  return {f, df};
}

double ode_residual_max(const GroundStateProfile& prof) {
  const double dr = prof.dr();
  const double k2 = prof.mass_gap2();
  double worst = 0.0;
  for (int i = 1; i + 1 < prof.r_samples.size(); ++i) {
    const double f = prof.f_samples[i];
    const double d2 = (prof.f_samples[i + 1] - 2 * f + prof.f_samples[i - 1]) / (dr * dr);
    const double res = d2 + 2.0 / prof.r_samples[i] * prof.df_samples[i] - k2 * f +
                       std::pow(std::abs(f), prof.p - 1.0) * f;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

}  // namespace mkg
