#include "mkg/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace mkg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

using Section = std::map<std::string, std::string>;

Eigen::Vector3d parse_vec3(const std::string& s, const std::string& key) {
  Eigen::Vector3d v;
  std::stringstream ss(s);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',') && i < 3) v[i++] = std::stod(trim(item));
  if (i != 3) throw ConfigInvalid("key '" + key + "' needs three comma-separated values");
  return v;
}

struct Reader {
  const std::map<std::string, Section>& sections;

  const Section& section(const std::string& name) const {
    auto it = sections.find(name);
    if (it == sections.end()) throw ConfigInvalid("missing section [" + name + "]");
    return it->second;
  }
  bool has(const std::string& sec) const { return sections.count(sec) > 0; }

  double num(const std::string& sec, const std::string& key) const {
    const Section& s = section(sec);
    auto it = s.find(key);
    if (it == s.end()) throw ConfigInvalid("missing key '" + key + "' in [" + sec + "]");
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw ConfigInvalid("key '" + key + "' in [" + sec + "] is not a number");
    }
  }
  double num_or(const std::string& sec, const std::string& key, double fallback) const {
    if (!has(sec)) return fallback;
    auto it = section(sec).find(key);
    if (it == section(sec).end()) return fallback;
    return num(sec, key);
  }
  std::string str_or(const std::string& sec, const std::string& key,
                     const std::string& fallback) const {
    if (!has(sec)) return fallback;
    auto it = section(sec).find(key);
    return it == section(sec).end() ? fallback : it->second;
  }
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigInvalid("unterminated section at line " +
                                                  std::to_string(lineno));
      current = trim(line.substr(1, line.size() - 2));
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("expected key = value at line " + std::to_string(lineno));
    if (current.empty())
      throw ConfigInvalid("key outside any section at line " + std::to_string(lineno));
    sections[current][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  Reader r{sections};
  ExperimentConfig cfg;
  cfg.m = r.num("physics", "m");
  cfg.p = r.num("physics", "p");
  cfg.eps = r.num("physics", "eps");
  cfg.delta = r.num("physics", "delta");
  cfg.omega = r.num("soliton", "omega");
  cfg.theta = r.num("soliton", "theta");
  cfg.xi = parse_vec3(r.str_or("soliton", "xi", "0,0,0"), "xi");
  cfg.u = parse_vec3(r.str_or("soliton", "u", "0,0,0"), "u");
  cfg.L = r.num("grid", "L");
  cfg.n = int(r.num("grid", "n"));
  cfg.cfl_safety = r.num_or("grid", "cfl_safety", 0.45);
  cfg.box_fit_tol = r.num_or("grid", "box_fit_tol", 1e-8);
  cfg.t_end = r.num("run", "t_end");
  cfg.snapshot_every = r.num_or("run", "snapshot_every", 2.0);
  cfg.diag_every = r.num_or("run", "diag_every", 1.0);
  cfg.seed = (unsigned long)(r.num_or("perturbation", "seed", 1));
  cfg.amplitude = r.num_or("perturbation", "amplitude", 0.0);
  cfg.profile = r.str_or("perturbation", "profile", "none");
  cfg.R0 = r.num_or("diagnostics", "R0", 0.0);
  cfg.u0 = parse_vec3(r.str_or("diagnostics", "u0", "0,0,0"), "u0");
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (n < 4 || n % 2 != 0) throw ConfigInvalid("grid n must be even and >= 4");
  if (L <= 0) throw ConfigInvalid("grid L must be positive");
  if (cfl_safety <= 0 || cfl_safety > 1) throw ConfigInvalid("cfl_safety must be in (0,1]");
  if (t_end <= 0) throw ConfigInvalid("t_end must be positive");
  if (snapshot_every <= 0 || diag_every <= 0)
    throw ConfigInvalid("snapshot_every and diag_every must be positive");
  const double ratio = snapshot_every / diag_every;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw ConfigInvalid("snapshot_every must be a multiple of diag_every");
  if (profile != "none" && profile != "gaussian" && profile != "modes")
    throw ConfigInvalid("perturbation profile must be none, gaussian or modes");
  if (eps < 0 || delta < 0) throw ConfigInvalid("eps and delta must be non-negative");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
  char buf[2048];
  std::snprintf(buf, sizeof buf,
                "[physics]\nm = %.17g\np = %.17g\neps = %.17g\ndelta = %.17g\n\n"
                "[soliton]\nomega = %.17g\ntheta = %.17g\nxi = %.17g,%.17g,%.17g\n"
                "u = %.17g,%.17g,%.17g\n\n"
                "[grid]\nL = %.17g\nn = %d\ncfl_safety = %.17g\nbox_fit_tol = %.17g\n\n"
                "[run]\nt_end = %.17g\nsnapshot_every = %.17g\ndiag_every = %.17g\n\n"
                "[perturbation]\nseed = %lu\namplitude = %.17g\nprofile = %s\n\n"
                "[diagnostics]\nR0 = %.17g\nu0 = %.17g,%.17g,%.17g\n",
                cfg.m, cfg.p, cfg.eps, cfg.delta, cfg.omega, cfg.theta, cfg.xi[0],
                cfg.xi[1], cfg.xi[2], cfg.u[0], cfg.u[1], cfg.u[2], cfg.L, cfg.n,
                cfg.cfl_safety, cfg.box_fit_tol, cfg.t_end, cfg.snapshot_every,
                cfg.diag_every, cfg.seed, cfg.amplitude, cfg.profile.c_str(), cfg.R0,
                cfg.u0[0], cfg.u0[1], cfg.u0[2]);
  return buf;
}

}  // namespace mkg
