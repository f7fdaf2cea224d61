#pragma once

#include <string>

#include <Eigen/Dense>

#include "mkg/errors.hpp"

namespace mkg {

// flat key-value config with bracketed sections; see docs in README
struct ExperimentConfig {
  // [physics]
  double m = 1.0, p = 2.0, eps = 0.0, delta = 0.0;
  // [soliton]
  double omega = 0.8, theta = 0.0;
  Eigen::Vector3d xi = Eigen::Vector3d::Zero();
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  // [grid]
  double L = 16.0;
  int n = 64;
  double cfl_safety = 0.45;
  double box_fit_tol = 1e-8;
  // [run]
  double t_end = 20.0;
  double snapshot_every = 2.0;
  double diag_every = 1.0;
  // [perturbation]
  unsigned long seed = 1;
  double amplitude = 0.0;        // target weighted norm of the perturbation
  std::string profile = "none";  // none | gaussian | modes
  // [diagnostics]
  double R0 = 0.0;  // 0 disables the exterior energies
  Eigen::Vector3d u0 = Eigen::Vector3d::Zero();

  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace mkg
