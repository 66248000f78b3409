#pragma once

// JSON run configuration shared by every CLI subcommand.
//
// {
//   "source":     {"c_p": 1e-10, "f_res": 1e5, "i_amp": 1e-5, "v_d": 0},
//   "sshc":       {"k": 8, "bank": [...], "r_on": 117.6, "settle_factor": 5},
//   "timing":     {"budget_fraction": 0.1},
//   "process":    {"mim_density": 2, "chip_thickness_mm": 0.3},
//   "settling":   {"mode": "full" | "partial", "t_phase": 0},
//   "solver":     {"tol": 1e-12, "max_iters": 10000, "v_ref": 1},
//   "efficiency": {"k_min": 1, "k_max": 8},
//   "simulation": {"rectifier": "sshc" | "fbr" | "sshi", "v_s": "auto" | volts,
//                  "flip_duration": "auto" | seconds, "sshi_efficiency": 0.8,
//                  "n_cycles": 5, "steps_per_period": 2000},
//   "design":     {"area_budget_mm2": 0.4},
//   "sweep":      {"axes": [{"name": "k", "min": 1, "max": 8, "steps": 8,
//                            "spacing": "linear" | "log", "values": [...]}],
//                  "objectives": ["flip_efficiency", ...]}
// }
//
// Every section and key is optional; unknown keys are rejected.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sshc/core.hpp"
#include "sshc/flip_solver.hpp"
#include "sshc/footprint.hpp"
#include "sshc/sweep.hpp"
#include "sshc/waveform.hpp"

namespace sshc::io {

/// Thrown for malformed or invalid configuration documents.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SweepSection {
  std::vector<Axis> axes;
  std::vector<Objective> objectives;

  friend bool operator==(const SweepSection&, const SweepSection&) = default;
};

struct RunConfig {
  PiezoSource<> source;

  int k = 8;
  std::optional<std::vector<double>> bank;  // default: k copies of c_p
  std::optional<double> r_on;               // default: the largest R_ON the budget allows
  double settle_factor = 5;
  double budget_fraction = 0.1;

  ProcessParams<> process;
  double chip_thickness_mm = default_chip_thickness_mm;

  SettlingModel<> settle;
  SolverOptions<> solver;

  int k_min = 1;
  int k_max = 8;

  RectifierKind rectifier = RectifierKind::sshc;
  std::optional<double> v_s;            // default: optimal storage voltage
  std::optional<double> flip_duration;  // default: SSHC flip time, 0 for SSHI
  double sshi_efficiency = 0.8;
  int n_cycles = 5;
  int steps_per_period = 2000;

  std::optional<double> area_budget_mm2;

  std::optional<SweepSection> sweep;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  /// R_ON actually used: the configured value or the budget limit for k.
  double resolved_r_on() const;
  SshcConfig<> sshc_config() const;
  DesignPoint design_point() const;
};

/// Every violated constraint of the assembled configuration.
ValidationReport validate(const RunConfig& config);

RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json config_to_json(const RunConfig& config);

RunConfig load_config(const std::string& path);

}  // namespace sshc::io
