#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mkg/diagnostics.hpp"
#include "mkg/experiment.hpp"
#include "mkg/ground_state.hpp"
#include "mkg/modulation.hpp"
#include "mkg/snapshot_io.hpp"
#include "mkg/spectra.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

mkg::SolitonParams parse_lambda(const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() != 8)
    throw mkg::ConfigInvalid("lambda needs 8 components: omega,theta,xi(3),u(3)");
  mkg::SolitonParams lam;
  lam.omega = v[0];
  lam.theta = v[1];
  lam.xi << v[2], v[3], v[4];
  lam.u << v[5], v[6], v[7];
  return lam;
}

int cmd_ground_state(double p, double m, double omega, double rmax, int n,
                     const std::string& out) {
  // the unit solve needs its own minimum range; the rescaled output then
  // covers at least [0, rmax]
  const double kappa = std::sqrt(m * m - omega * omega);
  const double unit_rmax = std::max(30.0, rmax * kappa);
  mkg::GroundStateProfile unit = mkg::solve_unit_profile(p, unit_rmax, n);
  mkg::GroundStateProfile prof = mkg::rescale_profile(unit, m, omega);
  {
    std::ofstream csv(out);
    csv << "r,f,df\n";
    char buf[128];
    for (int i = 0; i < prof.r_samples.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", prof.r_samples[i],
                    prof.f_samples[i], prof.df_samples[i]);
      csv << buf;
    }
  }
  const auto [res_a, res_b] = mkg::energy_identity_residuals(prof);
  json side;
  side["m"] = m;
  side["omega"] = omega;
  side["p"] = p;
  side["tail_rate"] = prof.tail_rate;
  side["f0"] = prof.f0();
  side["identity_residuals"] = {res_a, res_b};
  std::ofstream js(out + ".json");
  js << side.dump(2) << "\n";
  std::printf("ground-state: f0 = %.12g, tail_rate = %.12g, identities (%.3g, %.3g)\n",
              prof.f0(), prof.tail_rate, res_a, res_b);
  return 0;
}

int cmd_soliton(const std::string& lambda, const std::string& grid_s, double m, double p,
                const std::string& out) {
  const mkg::SolitonParams lam = parse_lambda(lambda);
  const auto gv = parse_list(grid_s);
  if (gv.size() != 2) throw mkg::ConfigInvalid("--grid needs L,n");
  mkg::GridSpec grid{gv[0], int(gv[1]), 0.45};
  grid.validate();
  mkg::ProfileFamily fam = mkg::make_family(p, m);

  mkg::FieldState s;
  s.grid = grid;
  s.m = m;
  s.p = p;
  const auto N = grid.size();
  s.phi.resize(N);
  s.pi.resize(N);
  for (int nu = 0; nu < 4; ++nu) {
    s.a[nu] = mkg::RArray::Zero(N);
    s.adot[nu] = mkg::RArray::Zero(N);
  }
  const auto shifts = mkg::active_image_shifts(lam, fam, grid.L);
  const int n = grid.n;
  mkg::parallel_for(N, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const int ix = int(i / (std::int64_t(n) * n)), iy = int((i / n) % n), iz = int(i % n);
      const mkg::PhiPsi v =
          mkg::eval_soliton_periodic(grid.point(ix, iy, iz), lam, fam, shifts);
      s.phi[i] = v.phi;
      s.pi[i] = v.psi;
    }
  });
  mkg::write_snapshot(s, out);
  std::printf("soliton snapshot written to %s\n", out.c_str());
  return 0;
}

int cmd_spectra(double p, double m, double omega, const std::string& sectors_s, int k,
                const std::string& out) {
  mkg::ProfileFamily fam = mkg::make_family(p, m);
  mkg::GroundStateProfile prof = mkg::rescale_profile(fam.unit, m, omega);
  json result = json::array();
  for (const double sd : parse_list(sectors_s)) {
    const int ell = int(sd);
    for (const auto which : {mkg::WhichOperator::plus, mkg::WhichOperator::minus}) {
      mkg::RadialOperator op = mkg::assemble_operator(prof, which, ell, 1600);
      const Eigen::VectorXd evs = mkg::lowest_eigenvalues(op, k);
      json entry;
      entry["sector"] = ell;
      entry["operator"] = which == mkg::WhichOperator::plus ? "plus" : "minus";
      entry["eigenvalues"] = std::vector<double>(evs.data(), evs.data() + evs.size());
      json kr = json::object();
      if (which == mkg::WhichOperator::minus && ell == 0) {
        Eigen::VectorXd g(op.size());
        for (int i = 0; i < op.size(); ++i)
          g[i] = op.r_grid[i] * mkg::evaluate_profile(prof, op.r_grid[i]).first;
        kr["f_omega"] = mkg::kernel_residual(op, g);
      }
      if (which == mkg::WhichOperator::plus && ell == 1) {
        Eigen::VectorXd g(op.size());
        for (int i = 0; i < op.size(); ++i)
          g[i] = op.r_grid[i] * mkg::evaluate_profile(prof, op.r_grid[i]).second;
        kr["df_omega"] = mkg::kernel_residual(op, g);
      }
      entry["kernel_residuals"] = kr;
      result.push_back(entry);
    }
  }
  std::ofstream js(out);
  js << result.dump(2) << "\n";
  std::printf("spectra written to %s\n", out.c_str());
  return 0;
}

int cmd_track(const std::string& snapshots, const std::string& guess_s,
              const std::string& out) {
  const mkg::SolitonParams guess = parse_lambda(guess_s);
  const auto files = mkg::list_snapshots(snapshots);
  if (files.empty()) throw mkg::Error("no snapshots in " + snapshots);
  const mkg::FieldState first = mkg::read_snapshot(files.front());
  mkg::ProfileFamily fam = mkg::make_family(first.p, first.m);
  auto records = mkg::track_snapshots(snapshots, guess, fam);
  mkg::write_track_csv(records, out);
  std::printf("tracked %zu snapshots -> %s\n", records.size(), out.c_str());
  return 0;
}

int cmd_diagnose(const std::string& snapshots, double R0, const std::string& u0_s,
                 const std::string& track_csv, const std::string& out) {
  const auto files = mkg::list_snapshots(snapshots);
  if (files.empty()) throw mkg::Error("no snapshots in " + snapshots);
  const auto u0v = parse_list(u0_s);
  Eigen::Vector3d u0{u0v.at(0), u0v.at(1), u0v.at(2)};

  // fitted parameters per time, optional (enables the dH column)
  std::vector<std::pair<double, mkg::SolitonParams>> lam_by_t;
  std::unique_ptr<mkg::ProfileFamily> fam;
  if (!track_csv.empty()) {
    std::ifstream in(track_csv);
    if (!in) throw mkg::Error("cannot open track csv " + track_csv);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const auto v = parse_list(line);
      if (v.size() < 9) continue;
      mkg::SolitonParams lam;
      lam.omega = v[1];
      lam.theta = v[2];
      lam.xi << v[3], v[4], v[5];
      lam.u << v[6], v[7], v[8];
      lam_by_t.emplace_back(v[0], lam);
    }
  }

  std::vector<mkg::DiagnosticsSample> rows;
  for (const auto& f : files) {
    mkg::FieldState s = mkg::read_snapshot(f);
    s.u0 = u0;
    if (!fam) fam = std::make_unique<mkg::ProfileFamily>(mkg::make_family(s.p, s.m));
    std::optional<mkg::SolitonParams> lam_t, lam_0;
    if (!lam_by_t.empty()) {
      lam_0 = lam_by_t.front().second;
      for (const auto& [t, lam] : lam_by_t)
        if (std::abs(t - s.t) < 1e-9) lam_t = lam;
    }
    rows.push_back(mkg::compute_sample(s, R0, lam_t, lam_0, fam.get()));
  }
  mkg::write_diagnostics_csv(rows, out);
  std::printf("diagnostics for %zu snapshots -> %s\n", rows.size(), out.c_str());
  return 0;
}

int cmd_report(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "report.json");
  if (!in) throw mkg::Error("no report.json under " + dir);
  json j = json::parse(in);
  std::printf("report for %s (wall %.1fs)\n", dir.c_str(),
              j.value("wall_seconds", 0.0));
  for (const auto& c : j["checks"])
    std::printf("  %-32s %s  value %.6g threshold %.6g\n",
                c["name"].get<std::string>().c_str(),
                c["pass"].get<bool>() ? "PASS" : "FAIL", c["value"].get<double>(),
                c["threshold"].get<double>());
  std::printf("overall: %s\n", j.value("all_pass", false) ? "PASS" : "FAIL");
  return j.value("all_pass", false) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maxwell-Klein-Gordon soliton laboratory"};
  app.require_subcommand(1);

  // ground-state
  double gs_p = 2.0, gs_m = 1.0, gs_omega = 0.0, gs_rmax = 30.0;
  int gs_n = 4000;
  std::string gs_out = "ground_state.csv";
  auto* gs = app.add_subcommand("ground-state", "solve the radial ground state");
  gs->add_option("--p", gs_p)->required();
  gs->add_option("--m", gs_m)->required();
  gs->add_option("--omega", gs_omega)->required();
  gs->add_option("--rmax", gs_rmax);
  gs->add_option("--n", gs_n);
  gs->add_option("--out", gs_out)->required();

  // soliton
  std::string sol_lambda, sol_grid, sol_out = "soliton.bin";
  double sol_m = 1.0, sol_p = 2.0;
  auto* sol = app.add_subcommand("soliton", "sample a boosted soliton snapshot");
  sol->add_option("--lambda", sol_lambda)->required();
  sol->add_option("--grid", sol_grid)->required();
  sol->add_option("--m", sol_m);
  sol->add_option("--p", sol_p);
  sol->add_option("--out", sol_out)->required();

  // spectra
  double sp_p = 2.0, sp_m = 1.0, sp_omega = 0.8;
  int sp_k = 5;
  std::string sp_sectors = "0,1,2", sp_out = "spectra.json";
  auto* sp = app.add_subcommand("spectra", "linearized operator spectra");
  sp->add_option("--p", sp_p)->required();
  sp->add_option("--m", sp_m)->required();
  sp->add_option("--omega", sp_omega)->required();
  sp->add_option("--sectors", sp_sectors);
  sp->add_option("--k", sp_k);
  sp->add_option("--out", sp_out)->required();

  // evolve
  std::string ev_config, ev_out = "run_out";
  auto* ev = app.add_subcommand("evolve", "run a configured evolution");
  ev->add_option("--config", ev_config)->required();
  ev->add_option("--out", ev_out);

  // track
  std::string tr_snapshots, tr_guess, tr_out = "track.csv";
  auto* tr = app.add_subcommand("track", "fit the modulation curve on snapshots");
  tr->add_option("--snapshots", tr_snapshots)->required();
  tr->add_option("--guess", tr_guess)->required();
  tr->add_option("--out", tr_out)->required();

  // diagnose
  std::string dg_snapshots, dg_u0 = "0,0,0", dg_track, dg_out = "diagnostics.csv";
  double dg_R0 = 0.0;
  auto* dg = app.add_subcommand("diagnose", "conserved quantities per snapshot");
  dg->add_option("--snapshots", dg_snapshots)->required();
  dg->add_option("--R0", dg_R0)->required();
  dg->add_option("--u0", dg_u0);
  dg->add_option("--track", dg_track);
  dg->add_option("--out", dg_out)->required();

  // sweep
  std::string sw_config, sw_axis, sw_values, sw_out = "sweep_out";
  auto* sw = app.add_subcommand("sweep", "run a parameter sweep");
  sw->add_option("--config", sw_config)->required();
  sw->add_option("--axis", sw_axis)->required();
  sw->add_option("--values", sw_values)->required();
  sw->add_option("--out", sw_out);

  // report
  std::string rp_dir;
  auto* rp = app.add_subcommand("report", "print the run report");
  rp->add_option("--dir", rp_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gs->parsed()) return cmd_ground_state(gs_p, gs_m, gs_omega, gs_rmax, gs_n, gs_out);
    if (sol->parsed()) return cmd_soliton(sol_lambda, sol_grid, sol_m, sol_p, sol_out);
    if (sp->parsed()) return cmd_spectra(sp_p, sp_m, sp_omega, sp_sectors, sp_k, sp_out);
    if (ev->parsed()) {
      const mkg::ExperimentConfig cfg = mkg::load_config(ev_config);
      const mkg::RunReport rep = mkg::run_experiment(cfg, ev_out);
      std::printf("run finished in %.1fs, checks %s\n", rep.wall_seconds,
                  rep.all_pass() ? "PASS" : "FAIL");
      return rep.all_pass() ? 0 : 1;
    }
    if (tr->parsed()) return cmd_track(tr_snapshots, tr_guess, tr_out);
    if (dg->parsed()) return cmd_diagnose(dg_snapshots, dg_R0, dg_u0, dg_track, dg_out);
    if (sw->parsed()) {
      const mkg::ExperimentConfig cfg = mkg::load_config(sw_config);
      mkg::sweep(cfg, sw_axis, parse_list(sw_values), sw_out);
      std::printf("sweep table written under %s\n", sw_out.c_str());
      return 0;
    }
    if (rp->parsed()) return cmd_report(rp_dir);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 0;
}
