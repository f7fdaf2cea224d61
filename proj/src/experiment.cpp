#include "mkg/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "mkg/snapshot_io.hpp"

namespace mkg {

namespace fs = std::filesystem;

Perturbation make_perturbation(const ExperimentConfig& cfg, const GridSpec& grid,
                               const ProfileFamily& fam) {
  const std::int64_t N = grid.size();
  Perturbation pert;
  pert.v = CArray::Zero(N);
  pert.w = CArray::Zero(N);
  if (cfg.profile == "none" || cfg.amplitude == 0.0) return pert;

  const double kappa = std::sqrt(cfg.m * cfg.m - cfg.omega * cfg.omega);
  const double width = 2.0 / kappa;
  const int n = grid.n;

  struct Bump {
    Eigen::Vector3d center;
    Complex cv, cw;
  };
  std::vector<Bump> bumps;
  if (cfg.profile == "gaussian") {
    bumps.push_back({cfg.xi, Complex(1.0, 0.4), Complex(0.0, 0.3)});
  } else {  // modes: a few seeded bumps around the soliton
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int b = 0; b < 4; ++b) {
      Bump bump;
      bump.center = cfg.xi + 0.8 * width * Eigen::Vector3d(unif(rng), unif(rng), unif(rng));
      bump.cv = Complex(unif(rng), unif(rng));
      bump.cw = Complex(unif(rng), unif(rng));
      bumps.push_back(bump);
    }
  }
  parallel_for(N, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
      const Eigen::Vector3d x = grid.point(ix, iy, iz);
      for (const auto& bump : bumps) {
        const double g = std::exp(-(x - bump.center).squaredNorm() / (width * width));
        pert.v[i] += bump.cv * g;
        pert.w[i] += bump.cw * g;
      }
    }
  });

  // scale so the weighted norm of the assumption equals the amplitude
  std::array<CArray, 3> gv;
  for (int ax = 0; ax < 3; ++ax) gv[ax] = central_diff(pert.v, grid, ax);
  auto sums = deterministic_grid_sum(N, 1, [&](std::int64_t i, double* acc) {
    const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
    const double x2 = grid.point(ix, iy, iz).squaredNorm();
    double gsq = 0;
    for (int ax = 0; ax < 3; ++ax) gsq += std::norm(gv[ax][i]);
    acc[0] += (1.0 + x2) * (gsq + std::norm(pert.v[i]) + std::norm(pert.w[i]));
  });
  const double wnorm = std::sqrt(sums[0] * grid.cell_volume());
  if (wnorm > 0) {
    pert.v *= cfg.amplitude / wnorm;
    pert.w *= cfg.amplitude / wnorm;
  }
  return pert;
}

bool RunReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

RunReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  const auto t_start = std::chrono::steady_clock::now();
  cfg.validate();
  fs::create_directories(out_dir);
  {
    std::ofstream cfg_out(fs::path(out_dir) / "config.ini");
    cfg_out << dump_config(cfg);
  }

  GridSpec grid{cfg.L, cfg.n, cfg.cfl_safety};
  ProfileFamily fam = make_family(cfg.p, cfg.m);
  SolitonParams lam0{cfg.omega, cfg.theta, cfg.xi, cfg.u};

  Perturbation pert = make_perturbation(cfg, grid, fam);
  std::optional<Perturbation> opt_pert;
  if (cfg.profile != "none" && cfg.amplitude > 0) opt_pert = std::move(pert);

  FieldState init = build_initial_data(lam0, fam, grid, cfg.eps, cfg.delta, opt_pert,
                                       cfg.box_fit_tol);
  init.u0 = cfg.u0;

  // the step count per diagnostics interval: round dt down so it divides
  const double dt_cfl = grid.dt();
  const int steps_per_diag = int(std::ceil(cfg.diag_every / dt_cfl - 1e-12));
  const double dt = cfg.diag_every / steps_per_diag;
  init.grid.cfl_safety = cfg.cfl_safety * dt / dt_cfl;  // effective safety after rounding

  const int diag_per_snapshot = int(std::llround(cfg.snapshot_every / cfg.diag_every));
  const int total_diag = int(std::llround(cfg.t_end / cfg.diag_every));

  RunReport report;
  report.cfg = cfg;

  const double constraint0 = initial_constraint_residual(init);
  const double gauge0 = gauge_residual(init);
  const double Q0 = total_charge(init);
  const Eigen::Vector4d Pi0 = momenta(init);

  Stepper stepper(std::move(init));

  auto snap_name = [&](int k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "snapshot_%05d.bin", k);
    return (fs::path(out_dir) / buf).string();
  };

  double max_gauge = gauge0, max_dQ = 0.0, max_dPi0 = 0.0, max_jnorm = 0.0;
  report.samples.push_back(compute_sample(stepper.state(), cfg.R0));
  write_snapshot(stepper.state(), snap_name(0));
  int snap_count = 1;

  const double coup = cfg.delta * cfg.delta * cfg.eps * cfg.eps;
  for (int d = 1; d <= total_diag; ++d) {
    for (int k = 0; k < steps_per_diag; ++k) stepper.step();
    const FieldState& s = stepper.state();
    report.samples.push_back(compute_sample(s, cfg.R0));
    max_gauge = std::max(max_gauge, report.samples.back().gauge_res);
    max_dQ = std::max(max_dQ, std::abs(report.samples.back().Q - Q0));
    max_dPi0 = std::max(max_dPi0, std::abs(report.samples.back().Pi[0] - Pi0[0]));
    if (coup > 0) max_jnorm = std::max(max_jnorm, l2_norm(current_density_field(s, 0), s.grid));
    if (d % diag_per_snapshot == 0) write_snapshot(s, snap_name(snap_count++));
  }

  // health checks
  report.checks.push_back({"initial_constraint_residual", constraint0 < 1e-8, constraint0, 1e-8});
  report.checks.push_back({"initial_gauge_residual", gauge0 < 1e-8, gauge0, 1e-8});
  {
    // gauge propagation: O(h^2) per unit time at the coupling scale
    const double h2 = stepper.state().grid.h() * stepper.state().grid.h();
    const double scale = coup > 0 ? coup * max_jnorm * (1.0 + cfg.t_end) : 0.0;
    const double bound = 10.0 * (gauge0 + h2 * scale) + 1e-14;
    report.checks.push_back({"gauge_residual_bound", max_gauge <= bound, max_gauge, bound});
  }
  if (cfg.eps == 0.0 && cfg.delta == 0.0) {
    const double dQ_rel = std::abs(Q0) > 0 ? max_dQ / std::abs(Q0) : max_dQ;
    const double dPi_rel = std::abs(Pi0[0]) > 0 ? max_dPi0 / std::abs(Pi0[0]) : max_dPi0;
    report.checks.push_back({"flat_charge_drift", dQ_rel < 1e-3, dQ_rel, 1e-3});
    report.checks.push_back({"flat_energy_drift", dPi_rel < 1e-3, dPi_rel, 1e-3});
  }

  write_diagnostics_csv(report.samples, (fs::path(out_dir) / "diagnostics.csv").string());
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  write_report_json(report, (fs::path(out_dir) / "report.json").string());
  return report;
}

std::vector<ModulationRecord> track_snapshots(const std::string& snapshot_dir,
                                              const SolitonParams& guess,
                                              const ProfileFamily& fam) {
  const auto files = list_snapshots(snapshot_dir);
  if (files.empty()) throw Error("no snapshots in " + snapshot_dir);
  std::vector<ModulationRecord> records;
  SolitonParams lam = guess;
  for (const auto& f : files) {
    const FieldState s = read_snapshot(f);
    ModulationRecord rec = fit_lambda(s, fam, lam);
    lam = rec.lam;  // warm start the next fit
    records.push_back(std::move(rec));
  }
  if (records.size() >= 3) modulation_residual(records);
  return records;
}

void write_track_csv(const std::vector<ModulationRecord>& records, const std::string& path) {
  std::ofstream out(path);
  out << "t,omega,theta,xi_x,xi_y,xi_z,u_x,u_y,u_z,orth_residual,det_M,v_h1,w_l2,"
         "gamma_dot_norm\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g\n",
                  r.t, r.lam.omega, r.lam.theta, r.lam.xi[0], r.lam.xi[1], r.lam.xi[2],
                  r.lam.u[0], r.lam.u[1], r.lam.u[2], r.orth_residual, r.det_M, r.v_h1,
                  r.w_l2, r.gamma_dot.norm());
    out << buf;
  }
}

void write_diagnostics_csv(const std::vector<DiagnosticsSample>& rows,
                           const std::string& path) {
  std::ofstream out(path);
  out << "t,Q,Pi0,Pi1,Pi2,Pi3,centroid_x,centroid_y,centroid_z,gauge_res,ext_energy_k1,"
         "ext_energy_k2,a_bootstrap,dH\n";
  char buf[768];
  for (const auto& d : rows) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g\n",
                  d.t, d.Q, d.Pi[0], d.Pi[1], d.Pi[2], d.Pi[3], d.centroid[0],
                  d.centroid[1], d.centroid[2], d.gauge_res, d.ext_energy_k1,
                  d.ext_energy_k2, d.a_bootstrap, d.dH);
    out << buf;
  }
}

void write_report_json(const RunReport& report, const std::string& path) {
  nlohmann::json j;
  j["config"] = dump_config(report.cfg);
  j["wall_seconds"] = report.wall_seconds;
  j["all_pass"] = report.all_pass();
  for (const auto& c : report.checks)
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"value", c.value},
                           {"threshold", c.threshold}});
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

namespace {

// deviation of |phi| from the periodized soliton modulus at the launch point
double phi_modulus_deviation(const FieldState& s, const SolitonParams& lam0,
                             const ProfileFamily& fam) {
  const GridSpec& grid = s.grid;
  const auto shifts = active_image_shifts(lam0, fam, grid.L);
  const int n = grid.n;
  auto sums = deterministic_grid_sum(grid.size(), 2, [&](std::int64_t i, double* acc) {
    const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
    const PhiPsi sol = eval_soliton_periodic(grid.point(ix, iy, iz), lam0, fam, shifts);
    const double f = std::abs(sol.phi);
    const double d = std::abs(s.phi[i]) - f;
    acc[0] += d * d;
    acc[1] += f * f;
  });
  return std::sqrt(sums[0] / sums[1]);
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::string& axis,
                            const std::vector<double>& values, const std::string& out_dir) {
  if (axis != "eps" && axis != "delta" && axis != "omega" && axis != "h")
    throw ConfigInvalid("sweep axis must be eps, delta, omega or h");
  fs::create_directories(out_dir);
  std::vector<SweepRow> rows;
  for (const double v : values) {
    ExperimentConfig cfg = base;
    if (axis == "eps")
      cfg.eps = v;
    else if (axis == "delta")
      cfg.delta = v;
    else if (axis == "omega")
      cfg.omega = v;
    else {
      int n = int(std::llround(2.0 * cfg.L / v));
      if (n % 2) ++n;
      cfg.n = n;
    }
    char sub[64];
    std::snprintf(sub, sizeof sub, "%s_%.6g", axis.c_str(), v);
    const std::string run_dir = (fs::path(out_dir) / sub).string();
    run_experiment(cfg, run_dir);

    SweepRow row;
    row.value = v;
    ProfileFamily fam = make_family(cfg.p, cfg.m);
    SolitonParams lam0{cfg.omega, cfg.theta, cfg.xi, cfg.u};
    row.det_M0 = assemble_M0(lam0, fam).determinant();

    // straightness and bootstrap norm from the diagnostics series
    {
      std::vector<double> times;
      std::vector<Eigen::Vector3d> cents;
      double amax = 0;
      // recompute from snapshots (cheap relative to the run itself)
      const auto files = list_snapshots(run_dir);
      for (const auto& f : files) {
        const FieldState s = read_snapshot(f);
        times.push_back(s.t);
        cents.push_back(energy_centroid(s));
        amax = std::max(amax, a_bootstrap_norm(s));
      }
      row.a_bootstrap = amax;
      if (times.size() >= 10)
        row.max_perp_dev =
            centroid_and_straightness(times, cents, cfg.u0, cfg.L).max_perp_dev;
      const FieldState last = read_snapshot(files.back());
      row.phi_dev = phi_modulus_deviation(last, lam0, fam);
    }
    // modulation drift from fitted snapshots
    try {
      auto records = track_snapshots(run_dir, lam0, fam);
      double worst = 0;
      for (const auto& r : records) worst = std::max(worst, r.gamma_dot.norm());
      row.gamma_dot_norm = worst;
    } catch (const Error&) {
      // leave NaN when the fit is not applicable (e.g. heavily perturbed runs)
    }
    rows.push_back(row);
  }

  std::ofstream out(fs::path(out_dir) / "table.csv");
  out << axis
      << ",gamma_dot_norm,max_perp_dev,a_bootstrap,phi_dev,det_M0,log2_ratio_gamma,"
         "log2_ratio_perp,log2_ratio_boot,log2_ratio_phi\n";
  char buf[512];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto ratio = [&](double a, double b) {
      return (i + 1 < rows.size() && b != 0.0 && std::isfinite(a) && std::isfinite(b))
                 ? std::log2(a / b)
                 : std::numeric_limits<double>::quiet_NaN();
    };
    const SweepRow& r = rows[i];
    const SweepRow& nx = rows[std::min(i + 1, rows.size() - 1)];
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.6g,%.6g,%.6g,%.6g\n", r.value,
                  r.gamma_dot_norm, r.max_perp_dev, r.a_bootstrap, r.phi_dev, r.det_M0,
                  ratio(r.gamma_dot_norm, nx.gamma_dot_norm),
                  ratio(r.max_perp_dev, nx.max_perp_dev),
                  ratio(r.a_bootstrap, nx.a_bootstrap), ratio(r.phi_dev, nx.phi_dev));
    out << buf;
  }
  return rows;
}

}  // namespace mkg
