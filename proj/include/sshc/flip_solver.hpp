#pragma once

// Charge-sharing execution of the switching schedule and the steady-state
// voltage flip efficiency it converges to.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "sshc/core.hpp"

namespace sshc {

enum class SettlingMode { full, partial };

/// Full settling assumes every phase lasts long enough for the two connected
/// capacitors to equalise. Partial settling runs each phase for t_phase.
template <typename Scalar = double>
struct SettlingModel {
  SettlingMode mode = SettlingMode::full;
  Scalar t_phase{0};

  static SettlingModel full() { return {}; }
  static SettlingModel partial(Scalar t_phase) { return {SettlingMode::partial, t_phase}; }

  friend bool operator==(const SettlingModel&, const SettlingModel&) = default;
};

template <typename Scalar>
ValidationReport validate(const SettlingModel<Scalar>& settle) {
  ValidationReport report;
  if (settle.mode == SettlingMode::partial && !(settle.t_phase > 0)) {
    report.errors.emplace_back("t_phase must be positive in partial settling mode");
  }
  return report;
}

template <typename Scalar = double>
struct FlipResult {
  Scalar efficiency{0};
  BankState<Scalar> steady_bank;
  int iterations = 0;
  bool converged = false;
};

template <typename Scalar = double>
struct SolverOptions {
  Scalar tol{1e-12};
  int max_iters = 10000;
  Scalar v_ref{1};

  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

/// Remaining fraction of a voltage difference after `t` through time constant `tau`.
template <typename Scalar>
Scalar settling_residual(Scalar t, Scalar tau) {
  if (!(tau > 0)) return Scalar(0);
  return std::exp(-t / tau);
}

/// Connects two capacitors through the loop resistance. Charge
/// c_a*v_a + c_b*v_b is conserved; the voltage difference decays by
/// exp(-t_phase/tau) in partial mode and vanishes in full mode.
template <typename Scalar>
std::pair<Scalar, Scalar> share_pair(Scalar v_a, Scalar c_a, Scalar v_b, Scalar c_b,
                                     const SettlingModel<Scalar>& settle, Scalar tau) {
  if (!(c_a > 0) || !(c_b > 0)) throw std::invalid_argument("capacitance must be positive");
  const Scalar c_sum = c_a + c_b;
  const Scalar mean = (c_a * v_a + c_b * v_b) / c_sum;
  if (settle.mode == SettlingMode::full) return {mean, mean};

  const Scalar diff = (v_a - v_b) * settling_residual(settle.t_phase, tau);
  return {mean + (c_b / c_sum) * diff, mean - (c_a / c_sum) * diff};
}

/// Time constant of the loop formed by two capacitors in series with r_on.
template <typename Scalar>
Scalar pair_time_constant(Scalar r_on, Scalar c_a, Scalar c_b) {
  return r_on * (c_a * c_b) / (c_a + c_b);
}

/// Runs the 2k+1 phases once. Bank voltages carry over between calls so a
/// sequence of calls converges to the periodic steady state.
template <typename Scalar>
BankState<Scalar> flip_once(BankState<Scalar> state, const PiezoSource<Scalar>& source,
                            const SshcConfig<Scalar>& config, const SettlingModel<Scalar>& settle,
                            FlipDirection direction) {
  if (state.bank_v.size() != config.k) throw std::invalid_argument("bank state does not match k");

  for (const Phase& phase : build_phase_schedule(config.k, direction)) {
    if (phase.kind == PhaseKind::clear) {
      state.v_pt *= settle.mode == SettlingMode::full
                        ? Scalar(0)
                        : settling_residual(settle.t_phase, config.r_on * source.c_p);
      continue;
    }
    const auto i = static_cast<Eigen::Index>(phase.capacitor - 1);
    const Scalar sign = phase.polarity == Polarity::same ? Scalar(1) : Scalar(-1);
    const Scalar c_i = config.bank[i];
    const Scalar tau = pair_time_constant(config.r_on, source.c_p, c_i);
    auto [v_pt, v_cap] = share_pair(state.v_pt, source.c_p, sign * state.bank_v[i], c_i, settle, tau);
    state.v_pt = v_pt;
    state.bank_v[i] = sign * v_cap;
  }
  return state;
}

/// Bank voltages as the transducer sees them during the dump phases of a flip
/// in `direction`.
template <typename Scalar>
VectorX<Scalar> bank_seen_from_transducer(const BankState<Scalar>& state, FlipDirection direction) {
  return Scalar(direction_sign(direction)) * state.bank_v;
}

/// Alternating half cycles: the node is recharged to +-v_ref and flipped in
/// the matching direction until the relative change of the efficiency drops
/// below tol. The bank starts discharged. Non-convergence is reported through
/// FlipResult::converged.
template <typename Scalar>
FlipResult<Scalar> steady_state_efficiency(const PiezoSource<Scalar>& source,
                                           const SshcConfig<Scalar>& config,
                                           const SettlingModel<Scalar>& settle = {},
                                           const SolverOptions<Scalar>& options = {}) {
  require_valid(source, config);
  require_valid(settle);
  if (!(options.tol > 0)) throw std::invalid_argument("tol must be positive");
  if (options.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(options.v_ref > 0)) throw std::invalid_argument("v_ref must be positive");

  FlipResult<Scalar> result;
  BankState<Scalar> state = BankState<Scalar>::zero(config.k);
  FlipDirection direction = FlipDirection::down;
  Scalar previous = std::numeric_limits<Scalar>::quiet_NaN();

  for (int n = 1; n <= options.max_iters; ++n) {
    const Scalar sign = Scalar(direction_sign(direction));
    state.v_pt = sign * options.v_ref;
    state = flip_once(state, source, config, settle, direction);
    const Scalar eta = -sign * state.v_pt / options.v_ref;

    result.efficiency = eta;
    result.iterations = n;
    if (n > 1) {
      const Scalar change = std::abs(eta - previous);
      if (change == Scalar(0) || change < options.tol * std::abs(eta)) {
        result.converged = true;
        break;
      }
    }
    previous = eta;
    direction = opposite(direction);
  }
  result.steady_bank = state;
  return result;
}

/// Solves for the periodic steady state directly. The down-flip is linear in
/// (v_pt, bank), x' = M x, and consecutive half cycles leave the bank
/// in the same plate orientation, so the fixed point satisfies
/// (I - M_bb) b = M_b0 * v_ref.
template <typename Scalar>
FlipResult<Scalar> steady_state_direct(const PiezoSource<Scalar>& source,
                                       const SshcConfig<Scalar>& config,
                                       const SettlingModel<Scalar>& settle = {}) {
  require_valid(source, config);
  require_valid(settle);
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const Eigen::Index n = config.k + 1;
  Matrix map(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    BankState<Scalar> basis = BankState<Scalar>::zero(config.k);
    if (j == 0) {
      basis.v_pt = 1;
    } else {
      basis.bank_v[j - 1] = 1;
    }
    const auto image = flip_once(basis, source, config, settle, FlipDirection::down);
    map(0, j) = image.v_pt;
    map.col(j).tail(config.k) = image.bank_v;
  }

  FlipResult<Scalar> result;
  result.steady_bank = BankState<Scalar>::zero(config.k);
  if (config.k > 0) {
    const Matrix lhs = Matrix::Identity(config.k, config.k) - map.bottomRightCorner(config.k, config.k);
    result.steady_bank.bank_v = lhs.fullPivLu().solve(map.col(0).tail(config.k));
  }
  result.steady_bank.v_pt = map(0, 0) + map.row(0).tail(config.k).dot(result.steady_bank.bank_v);
  result.efficiency = -result.steady_bank.v_pt;
  result.converged = true;
  return result;
}

/// Equal-capacitor, fully settled fixed point k/(k+2).
template <typename Scalar = double>
Scalar closed_form_efficiency(int k) {
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  return Scalar(k) / Scalar(k + 2);
}

}  // namespace sshc
