#pragma once

#include <string>
#include <vector>

#include "mkg/config.hpp"
#include "mkg/diagnostics.hpp"
#include "mkg/evolve.hpp"
#include "mkg/modulation.hpp"

namespace mkg {

// perturbation field pair built from the config (deterministic in the seed);
// scaled so its weighted norm equals cfg.amplitude
Perturbation make_perturbation(const ExperimentConfig& cfg, const GridSpec& grid,
                               const ProfileFamily& fam);

struct RunCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct RunReport {
  ExperimentConfig cfg;
  std::vector<RunCheck> checks;
  std::vector<DiagnosticsSample> samples;
  double wall_seconds = 0.0;
  bool all_pass() const;
};

// build initial data, run the step loop, write snapshots/diagnostics/report
// under out_dir, and evaluate the per-run health checks
RunReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

// one row of the sweep table
struct SweepRow {
  double value = 0.0;
  double gamma_dot_norm = std::numeric_limits<double>::quiet_NaN();
  double max_perp_dev = std::numeric_limits<double>::quiet_NaN();
  double a_bootstrap = std::numeric_limits<double>::quiet_NaN();
  double phi_dev = std::numeric_limits<double>::quiet_NaN();
  double det_M0 = std::numeric_limits<double>::quiet_NaN();
};

// runs the template config with `axis` in {eps, delta, omega, h} set to each
// value; emits table.csv with log2-ratio columns under out_dir
std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::string& axis,
                            const std::vector<double>& values, const std::string& out_dir);

// fit every snapshot in a directory; initial guess from the first snapshot
std::vector<ModulationRecord> track_snapshots(const std::string& snapshot_dir,
                                              const SolitonParams& guess,
                                              const ProfileFamily& fam);

void write_track_csv(const std::vector<ModulationRecord>& records, const std::string& path);
void write_diagnostics_csv(const std::vector<DiagnosticsSample>& rows, const std::string& path);
void write_report_json(const RunReport& report, const std::string& path);

}  // namespace mkg
