#pragma once

// Grid evaluation over design parameters and the joint timing/area stage
// count selection.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sshc/core.hpp"
#include "sshc/flip_solver.hpp"
#include "sshc/footprint.hpp"

namespace sshc {

enum class Spacing { linear, log };

struct Axis {
  std::string name;
  double min = 0;
  double max = 0;
  int steps = 1;
  Spacing spacing = Spacing::linear;
  std::vector<double> values;  // explicit grid; overrides min/max/steps when non-empty

  std::vector<double> grid() const;

  friend bool operator==(const Axis&, const Axis&) = default;
};

enum class Objective { flip_efficiency, t_flip, max_r_on, max_k, p_out, p_out_at_opt_vs, bank_area };

std::string_view to_string(Objective objective);
std::optional<Objective> parse_objective(std::string_view name);

/// Every scalar a grid point needs. The bank is always k capacitors equal to c_p.
struct DesignPoint {
  PiezoSource<> source;
  int k = 8;
  double r_on = 0;
  double settle_factor = 5;
  double budget_fraction = 0.1;
  double v_s = 0;
  ProcessParams<> process;
  SettlingModel<> settle;
  SolverOptions<> solver;

  SshcConfig<> config() const { return SshcConfig<>::equal_bank(k, source.c_p, r_on, settle_factor); }
};

/// Names accepted as axis names: k, c_p, f_res, i_amp, v_d, r_on, v_s,
/// settle_factor, budget_fraction, mim_density.
const std::vector<std::string>& sweep_parameter_names();

/// Sets the named parameter; throws std::invalid_argument for unknown names
/// and for non-integral stage counts.
void set_parameter(DesignPoint& point, std::string_view name, double value);

struct SweepSpec {
  std::vector<Axis> axes;
  DesignPoint fixed;
  std::vector<Objective> objectives;
};

/// Throws std::invalid_argument naming the first offending axis.
void validate_sweep(const SweepSpec& spec);

inline constexpr std::string_view infeasible_marker = "infeasible";

struct Cell {
  std::optional<double> value;
  std::string marker;  // set when value is empty

  static Cell number(double v) { return {v, {}}; }
  static Cell flagged(std::string_view m) { return {std::nullopt, std::string(m)}; }
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Rows in lexicographic axis order (first axis outermost). Output is
/// independent of `threads`.
Table run_sweep(const SweepSpec& spec, unsigned threads = 1);

/// Objective value at one design point.
Cell evaluate(const DesignPoint& point, Objective objective);

struct StageConstraints {
  double r_on_available = 0;
  double area_budget_mm2 = 0;
  double budget_fraction = 0.1;
  double settle_factor = 5;
};

struct StageChoice {
  bool feasible = false;
  int k = 0;
  int k_timing = 0;   // largest k allowed by the flip-time budget
  int k_area = 0;     // largest k allowed by the area budget
  bool timing_binding = false;  // k + 1 would break the timing budget
  bool area_binding = false;    // k + 1 would break the area budget
  double t_flip = 0;
  double t_budget = 0;
  double area_mm2 = 0;
  std::string note;
};

/// Largest k meeting both the flip-time budget and the bank area budget with
/// every bank capacitor equal to c_p.
StageChoice best_stage_count(const StageConstraints& constraints, const PiezoSource<>& source,
                             const ProcessParams<>& process = {});

}  // namespace sshc
