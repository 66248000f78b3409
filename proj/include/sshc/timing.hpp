#pragma once

// Timing budget of a flip: per-phase time constant, total flip time and the
// inverted design constraint T_F = budget_fraction * T/2.

#include <cmath>
#include <stdexcept>

#include "sshc/core.hpp"

namespace sshc {

/// Relative slack used when comparing a derived quantity against a budget it
/// was solved from, so that round-off does not flip feasibility.
inline constexpr double budget_rel_slack = 1e-12;

template <typename Scalar>
bool within_budget(Scalar value, Scalar budget) {
  return value <= budget * (Scalar(1) + Scalar(budget_rel_slack));
}

template <typename Scalar = double>
struct TimingReport {
  Scalar tau{0};
  Scalar t_phase{0};
  Scalar t_flip{0};
  Scalar half_period{0};
  Scalar flip_fraction{0};
};

/// tau = r_on * c_p / 2 for the loop formed by the transducer and an equal
/// bank capacitor.
template <typename Scalar>
Scalar phase_time_constant(Scalar r_on, Scalar c_p) {
  if (!(c_p > 0)) throw std::invalid_argument("c_p must be positive");
  if (!(r_on >= 0)) throw std::invalid_argument("r_on must be non-negative");
  return r_on * c_p / Scalar(2);
}

template <typename Scalar>
Scalar total_flip_time(Scalar r_on, Scalar c_p, int k, Scalar settle_factor = Scalar(5)) {
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  if (!(settle_factor > 0)) throw std::invalid_argument("settle_factor must be positive");
  return settle_factor * phase_time_constant(r_on, c_p) * Scalar(2 * k + 1);
}

template <typename Scalar>
TimingReport<Scalar> timing_report(const PiezoSource<Scalar>& source, const SshcConfig<Scalar>& config) {
  require_valid(source, config);
  TimingReport<Scalar> report;
  report.tau = phase_time_constant(config.r_on, source.c_p);
  report.t_phase = config.settle_factor * report.tau;
  report.t_flip = report.t_phase * Scalar(2 * config.k + 1);
  report.half_period = source.half_period();
  report.flip_fraction = report.t_flip / report.half_period;
  return report;
}

namespace detail {
template <typename Scalar>
void check_budget_args(Scalar c_p, Scalar period, Scalar budget_fraction, Scalar settle_factor) {
  if (!(c_p > 0)) throw std::invalid_argument("c_p must be positive");
  if (!(period > 0)) throw std::invalid_argument("period must be positive");
  if (!(budget_fraction > 0 && budget_fraction <= 1)) {
    throw std::invalid_argument("budget_fraction must be in (0, 1]");
  }
  if (!(settle_factor > 0)) throw std::invalid_argument("settle_factor must be positive");
}
}  // namespace detail

/// Largest loop resistance for which the 2k+1 phases, each settle_factor time
/// constants long, fit in budget_fraction of the half period.
template <typename Scalar>
Scalar max_on_resistance(Scalar c_p, Scalar period, int k, Scalar budget_fraction = Scalar(0.1),
                         Scalar settle_factor = Scalar(5)) {
  detail::check_budget_args(c_p, period, budget_fraction, settle_factor);
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  return budget_fraction * period / (settle_factor * c_p * Scalar(2 * k + 1));
}

struct StageCount {
  bool feasible = false;
  int k = 0;  // meaningful only when feasible
};

/// Largest k whose flip time fits the budget; infeasible when even the
/// clearing phase alone does not.
template <typename Scalar>
StageCount max_stage_count(Scalar c_p, Scalar period, Scalar r_on, Scalar budget_fraction = Scalar(0.1),
                           Scalar settle_factor = Scalar(5)) {
  detail::check_budget_args(c_p, period, budget_fraction, settle_factor);
  if (!(r_on > 0)) throw std::invalid_argument("r_on must be positive");

  const Scalar budget = budget_fraction * period / Scalar(2);
  auto fits = [&](int k) { return within_budget(total_flip_time(r_on, c_p, k, settle_factor), budget); };
  if (!fits(0)) return {};

  const Scalar t_phase = settle_factor * phase_time_constant(r_on, c_p);
  const Scalar estimate = std::floor((budget / t_phase - Scalar(1)) / Scalar(2));
  if (estimate >= Scalar(1 << 30)) throw std::overflow_error("stage count exceeds representable range");
  int k = static_cast<int>(estimate < 0 ? Scalar(0) : estimate);
  while (!fits(k) && k > 0) --k;
  while (fits(k + 1)) ++k;
  return {true, k};
}

}  // namespace sshc
