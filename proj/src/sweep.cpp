#include "sshc/sweep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "sshc/timing.hpp"
#include "sshc/waveform.hpp"

namespace sshc {

namespace {

constexpr std::array<std::pair<Objective, std::string_view>, 7> objective_names{{
    {Objective::flip_efficiency, "flip_efficiency"},
    {Objective::t_flip, "t_flip"},
    {Objective::max_r_on, "max_r_on"},
    {Objective::max_k, "max_k"},
    {Objective::p_out, "p_out"},
    {Objective::p_out_at_opt_vs, "p_out_at_opt_vs"},
    {Objective::bank_area, "bank_area"},
}};

using Setter = std::function<void(DesignPoint&, double)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table{
      {"k",
       [](DesignPoint& p, double v) {
         const double rounded = std::round(v);
         if (std::abs(v - rounded) > 1e-9 * std::max(1.0, std::abs(v)) || rounded < 0 || rounded > 1e6) {
           throw std::invalid_argument("k must be a non-negative integer, got " + std::to_string(v));
         }
         p.k = static_cast<int>(rounded);
       }},
      {"c_p", [](DesignPoint& p, double v) { p.source.c_p = v; }},
      {"f_res", [](DesignPoint& p, double v) { p.source.f_res = v; }},
      {"i_amp", [](DesignPoint& p, double v) { p.source.i_amp = v; }},
      {"v_d", [](DesignPoint& p, double v) { p.source.v_d = v; }},
      {"r_on", [](DesignPoint& p, double v) { p.r_on = v; }},
      {"v_s", [](DesignPoint& p, double v) { p.v_s = v; }},
      {"settle_factor", [](DesignPoint& p, double v) { p.settle_factor = v; }},
      {"budget_fraction", [](DesignPoint& p, double v) { p.budget_fraction = v; }},
      {"mim_density", [](DesignPoint& p, double v) { p.process.mim_density = v; }},
  };
  return table;
}

}  // namespace

std::vector<double> Axis::grid() const {
  if (!values.empty()) return values;
  std::vector<double> out;
  if (steps < 1) return out;
  out.reserve(static_cast<std::size_t>(steps));
  if (steps == 1) {
    out.push_back(min);
    return out;
  }
  for (int i = 0; i < steps; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(steps - 1);
    if (spacing == Spacing::linear) {
      out.push_back(i == steps - 1 ? max : min + (max - min) * u);
    } else {
      out.push_back(i == steps - 1 ? max : min * std::pow(max / min, u));
    }
  }
  return out;
}

std::string_view to_string(Objective objective) {
  for (const auto& [o, name] : objective_names) {
    if (o == objective) return name;
  }
  return "unknown";
}

std::optional<Objective> parse_objective(std::string_view name) {
  for (const auto& [o, n] : objective_names) {
    if (n == name) return o;
  }
  return std::nullopt;
}

const std::vector<std::string>& sweep_parameter_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : setters()) out.push_back(entry.first);
    return out;
  }();
  return names;
}

void set_parameter(DesignPoint& point, std::string_view name, double value) {
  for (const auto& [n, set] : setters()) {
    if (n == name) {
      set(point, value);
      return;
    }
  }
  throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
}

void validate_sweep(const SweepSpec& spec) {
  if (spec.axes.empty()) throw std::invalid_argument("sweep has no axes");
  if (spec.objectives.empty()) throw std::invalid_argument("sweep has no objectives");
  std::set<std::string> seen;
  const auto& known = sweep_parameter_names();
  for (const Axis& axis : spec.axes) {
    const std::string where = "axis '" + axis.name + "': ";
    if (std::find(known.begin(), known.end(), axis.name) == known.end()) {
      throw std::invalid_argument(where + "unknown parameter");
    }
    if (!seen.insert(axis.name).second) throw std::invalid_argument(where + "duplicate axis name");
    if (axis.values.empty()) {
      if (axis.steps < 1) throw std::invalid_argument(where + "steps must be at least 1");
      if (!(axis.min <= axis.max)) throw std::invalid_argument(where + "min must not exceed max");
      if (axis.spacing == Spacing::log && !(axis.min > 0)) {
        throw std::invalid_argument(where + "log spacing needs a positive min");
      }
    }
    DesignPoint probe = spec.fixed;
    for (double v : axis.grid()) {
      if (!std::isfinite(v)) throw std::invalid_argument(where + "non-finite value");
      try {
        set_parameter(probe, axis.name, v);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + e.what());
      }
    }
  }
}

Cell evaluate(const DesignPoint& point, Objective objective) {
  const auto& s = point.source;
  auto efficiency = [&]() -> std::optional<double> {
    const auto flip = steady_state_efficiency(s, point.config(), point.settle, point.solver);
    if (!flip.converged) return std::nullopt;
    return flip.efficiency;
  };

  switch (objective) {
    case Objective::flip_efficiency: {
      auto eta = efficiency();
      return eta ? Cell::number(*eta) : Cell::flagged("nonconverged");
    }
    case Objective::t_flip:
      return Cell::number(total_flip_time(point.r_on, s.c_p, point.k, point.settle_factor));
    case Objective::max_r_on:
      return Cell::number(max_on_resistance(s.c_p, s.period(), point.k, point.budget_fraction, point.settle_factor));
    case Objective::max_k: {
      if (!(point.r_on > 0)) return Cell::flagged("unbounded");
      const auto count = max_stage_count(s.c_p, s.period(), point.r_on, point.budget_fraction, point.settle_factor);
      return count.feasible ? Cell::number(count.k) : Cell::flagged(infeasible_marker);
    }
    case Objective::p_out: {
      auto eta = efficiency();
      if (!eta) return Cell::flagged("nonconverged");
      return Cell::number(output_power_closed_form(s, *eta, point.v_s));
    }
    case Objective::p_out_at_opt_vs: {
      auto eta = efficiency();
      if (!eta) return Cell::flagged("nonconverged");
      const auto opt = optimal_storage_voltage(s, *eta);
      if (opt.unbounded) return Cell::flagged("unbounded");
      return opt.p_max > 0 ? Cell::number(opt.p_max) : Cell::flagged(infeasible_marker);
    }
    case Objective::bank_area:
      return Cell::number(bank_area(point.config(), point.process));
  }
  throw std::logic_error("unhandled objective");
}

Table run_sweep(const SweepSpec& spec, unsigned threads) {
  validate_sweep(spec);

  std::vector<std::vector<double>> grids;
  std::size_t total = 1;
  for (const Axis& axis : spec.axes) {
    grids.push_back(axis.grid());
    total *= grids.back().size();
  }
  if (total == 0) throw std::invalid_argument("sweep grid is empty");

  Table table;
  for (const Axis& axis : spec.axes) table.columns.push_back(axis.name);
  for (Objective o : spec.objectives) table.columns.emplace_back(to_string(o));
  table.rows.resize(total);

  auto fill_row = [&](std::size_t index) {
    // Mixed-radix decomposition, last axis fastest.
    std::vector<double> coords(grids.size());
    std::size_t rest = index;
    for (std::size_t a = grids.size(); a-- > 0;) {
      coords[a] = grids[a][rest % grids[a].size()];
      rest /= grids[a].size();
    }
    DesignPoint point = spec.fixed;
    std::vector<Cell> row;
    row.reserve(table.columns.size());
    for (std::size_t a = 0; a < grids.size(); ++a) {
      set_parameter(point, spec.axes[a].name, coords[a]);
      row.push_back(Cell::number(coords[a]));
    }
    for (Objective o : spec.objectives) row.push_back(evaluate(point, o));
    table.rows[index] = std::move(row);
  };

  const unsigned workers = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::min<std::size_t>(total, 256)));
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) fill_row(i);
    return table;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < total; i += workers) fill_row(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return table;
}

StageChoice best_stage_count(const StageConstraints& constraints, const PiezoSource<>& source,
                             const ProcessParams<>& process) {
  require_valid(source);
  require_valid(process);
  if (!(constraints.r_on_available > 0)) throw std::invalid_argument("r_on_available must be positive");
  if (!(constraints.area_budget_mm2 >= 0)) throw std::invalid_argument("area_budget must be non-negative");

  StageChoice choice;
  const double period = source.period();
  choice.t_budget = constraints.budget_fraction * period / 2.0;

  const auto timing = max_stage_count(source.c_p, period, constraints.r_on_available, constraints.budget_fraction,
                                      constraints.settle_factor);
  if (!timing.feasible) {
    choice.note = "flip-time budget is exceeded even by the clearing phase alone";
    choice.t_flip = total_flip_time(constraints.r_on_available, source.c_p, 0, constraints.settle_factor);
    return choice;
  }
  choice.k_timing = timing.k;

  const double unit_area = mim_area(source.c_p, process);
  auto area_of = [&](int k) { return bank_area(SshcConfig<>::equal_bank(k, source.c_p), process); };
  int k_area = static_cast<int>(std::min(std::floor(constraints.area_budget_mm2 / unit_area), 1e6));
  while (k_area > 0 && !within_budget(area_of(k_area), constraints.area_budget_mm2)) --k_area;
  while (within_budget(area_of(k_area + 1), constraints.area_budget_mm2)) ++k_area;
  choice.k_area = k_area;

  choice.feasible = true;
  choice.k = std::min(choice.k_timing, choice.k_area);
  choice.timing_binding = choice.k == choice.k_timing;
  choice.area_binding = choice.k == choice.k_area;
  choice.t_flip = total_flip_time(constraints.r_on_available, source.c_p, choice.k, constraints.settle_factor);
  choice.area_mm2 = area_of(choice.k);
  if (choice.k == 0) choice.note = "zero-bank design: only the clearing phase fits";
  return choice;
}

}  // namespace sshc
