#pragma once

// Time-domain model of the transducer behind an ideal bridge. The node
// integrates the source current, clamps at +-(V_S + 2 V_D) while the bridge
// conducts into storage, and is flipped at every zero crossing of I_P. Source
// charge that flows while a flip is in progress is lost.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sshc/core.hpp"
#include "sshc/flip_solver.hpp"
#include "sshc/timing.hpp"

namespace sshc {

enum class RectifierKind { fbr, sshc, sshi_baseline };

template <typename Scalar = double>
struct RectifierModel {
  RectifierKind kind = RectifierKind::fbr;
  Scalar flip_efficiency{0};
  Scalar flip_duration{0};

  static RectifierModel fbr() { return {}; }
  static RectifierModel sshc(Scalar eta, Scalar duration = Scalar(0)) {
    return {RectifierKind::sshc, eta, duration};
  }
  static RectifierModel sshi_baseline(Scalar eta, Scalar duration = Scalar(0)) {
    return {RectifierKind::sshi_baseline, eta, duration};
  }

  /// Ratio v_after / -v_before of a flip; -1 leaves the node untouched.
  Scalar effective_eta() const { return kind == RectifierKind::fbr ? Scalar(-1) : flip_efficiency; }
  Scalar effective_duration() const { return kind == RectifierKind::fbr ? Scalar(0) : flip_duration; }
};

template <typename Scalar>
ValidationReport validate(const RectifierModel<Scalar>& model) {
  ValidationReport report;
  if (model.kind != RectifierKind::fbr) {
    if (!(model.flip_efficiency >= 0 && model.flip_efficiency < 1)) {
      report.errors.emplace_back("flip_efficiency must be in [0, 1)");
    }
    if (!(model.flip_duration >= 0)) report.errors.emplace_back("flip_duration must be non-negative");
  }
  return report;
}

/// Charges per half cycle of the last simulated cycle.
template <typename Scalar = double>
struct PowerResult {
  Scalar p_out{0};
  Scalar v_s{0};
  Scalar q_half{0};
  Scalar q_reflip{0};
  Scalar q_flip_waste{0};
  Scalar q_out{0};
};

template <typename Scalar = double>
struct FlipWindow {
  Scalar start{0};
  Scalar end{0};
};

/// Samples at a fixed step: columns t [s], I_P [A], V_PT [V].
template <typename Scalar = double>
struct Trace {
  VectorX<Scalar> t;
  VectorX<Scalar> i_p;
  VectorX<Scalar> v_pt;
  Scalar period{0};
  int n_cycles = 0;
  std::vector<FlipWindow<Scalar>> flips;

  Eigen::Index size() const { return t.size(); }
};

template <typename Scalar = double>
struct SimulationOptions {
  int n_cycles = 5;
  int steps_per_period = 2000;
};

template <typename Scalar = double>
struct Simulation {
  Trace<Scalar> trace;
  PowerResult<Scalar> power;
};

/// Integral of |I_P| over half a period.
template <typename Scalar>
Scalar source_charge_per_half_cycle(const PiezoSource<Scalar>& source) {
  return source.i_amp * source.period() / std::numbers::pi_v<Scalar>;
}

/// Zero-duration-flip output power. eta = -1 is the plain bridge.
template <typename Scalar>
Scalar output_power_closed_form(const PiezoSource<Scalar>& source, Scalar eta, Scalar v_s) {
  require_valid(source);
  if (!(v_s >= 0)) throw std::invalid_argument("v_s must be non-negative");
  const Scalar q_reflip = source.c_p * (Scalar(1) - eta) * (v_s + Scalar(2) * source.v_d);
  const Scalar q_out = std::max(Scalar(0), source_charge_per_half_cycle(source) - q_reflip);
  return Scalar(2) * source.f_res * v_s * q_out;
}

template <typename Scalar = double>
struct OptimalStorage {
  Scalar v_s_opt{0};
  Scalar p_max{0};
  bool unbounded = false;  // lossless flip: power grows without bound in v_s
};

template <typename Scalar>
OptimalStorage<Scalar> optimal_storage_voltage(const PiezoSource<Scalar>& source, Scalar eta) {
  require_valid(source);
  if (!(eta >= -1 && eta <= 1)) throw std::invalid_argument("eta must be in [-1, 1]");
  OptimalStorage<Scalar> out;
  const Scalar loss = source.c_p * (Scalar(1) - eta);
  if (!(loss > 0)) {
    out.unbounded = true;
    out.v_s_opt = std::numeric_limits<Scalar>::infinity();
    out.p_max = std::numeric_limits<Scalar>::infinity();
    return out;
  }
  const Scalar q_half = source_charge_per_half_cycle(source);
  out.v_s_opt = std::max(Scalar(0), (q_half / loss - Scalar(2) * source.v_d) / Scalar(2));
  out.p_max = output_power_closed_form(source, eta, out.v_s_opt);
  return out;
}

template <typename Scalar>
Simulation<Scalar> simulate(const PiezoSource<Scalar>& source, const RectifierModel<Scalar>& model, Scalar v_s,
                            const SimulationOptions<Scalar>& options = {}) {
  require_valid(source);
  require_valid(model);
  if (!(v_s >= 0)) throw std::invalid_argument("v_s must be non-negative");
  if (options.n_cycles < 1) throw std::invalid_argument("n_cycles must be at least 1");
  if (options.steps_per_period < 1000) throw std::invalid_argument("steps_per_period must be at least 1000");

  const Scalar period = source.period();
  const Scalar half = period / Scalar(2);
  const Scalar omega = source.omega();
  const Scalar eta = model.effective_eta();
  const Scalar duration = model.effective_duration();
  if (duration > half) throw std::invalid_argument("flip_duration must not exceed half a period");

  const Scalar c_p = source.c_p;
  const Scalar v_clamp = v_s + Scalar(2) * source.v_d;
  const int n_steps = options.n_cycles * options.steps_per_period;
  const Scalar dt = period / Scalar(options.steps_per_period);
  const Scalar t_end = Scalar(options.n_cycles) * period;
  const Scalar eps = dt * Scalar(1e-9);
  const int n_crossings = 2 * options.n_cycles;

  Simulation<Scalar> sim;
  Trace<Scalar>& trace = sim.trace;
  trace.period = period;
  trace.n_cycles = options.n_cycles;
  trace.t.resize(n_steps + 1);
  trace.i_p.resize(n_steps + 1);
  trace.v_pt.resize(n_steps + 1);

  std::vector<Scalar> cuts;
  cuts.reserve(static_cast<std::size_t>(n_steps + 3 * n_crossings + 3));
  for (int n = 0; n <= n_steps; ++n) cuts.push_back(Scalar(n) * dt);
  for (int j = 0; j <= n_crossings; ++j) {
    const Scalar centre = Scalar(j) * half;
    cuts.push_back(centre);
    if (duration > 0) {
      trace.flips.push_back({centre - duration / Scalar(2), centre + duration / Scalar(2)});
      for (Scalar edge : {centre - duration / Scalar(2), centre + duration / Scalar(2)}) {
        if (edge > 0 && edge < t_end) cuts.push_back(edge);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [&](Scalar a, Scalar b) { return b - a <= eps; }),
             cuts.end());

  // Steady state just before the first crossing: clamped negative.
  const Scalar v_initial = -v_clamp;
  Scalar v = v_initial;
  int active_window = -1;
  int last_instant_flip = -1;
  Scalar v_pre{0};
  Scalar v_post{0};
  auto open_window = [&](int j, Scalar v_now) {
    active_window = j;
    v_pre = v_now;
    v_post = -eta * v_now;
  };
  auto ramp = [&](int j, Scalar t) {
    const Scalar start = Scalar(j) * half - duration / Scalar(2);
    return v_pre + (v_post - v_pre) * std::clamp((t - start) / duration, Scalar(0), Scalar(1));
  };

  if (duration > 0) {
    open_window(0, v_initial);
    v = ramp(0, Scalar(0));
  } else {
    v = -eta * v_initial;
    last_instant_flip = 0;
  }

  trace.t[0] = 0;
  trace.i_p[0] = 0;
  trace.v_pt[0] = v;
  int next_sample = 1;

  const Scalar last_cycle_start = t_end - period;
  Scalar q_total{0}, q_waste{0}, q_cap{0}, q_store{0};

  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const Scalar a = cuts[s];
    const Scalar b = cuts[s + 1];
    const Scalar mid = (a + b) / Scalar(2);
    // Exact source charge over [a, b].
    const Scalar dq = Scalar(2) * source.i_amp / omega * std::sin(omega * mid) * std::sin(omega * (b - a) / Scalar(2));
    const bool tally = a >= last_cycle_start - eps;
    const int j = static_cast<int>(std::lround(mid / half));
    const bool in_window = duration > 0 && std::abs(mid - Scalar(j) * half) < duration / Scalar(2);

    if (in_window) {
      if (active_window != j) open_window(j, v);
      const Scalar window_end = Scalar(j) * half + duration / Scalar(2);
      v = b >= window_end - eps ? v_post : ramp(j, b);
      if (tally) q_waste += std::abs(dq);
    } else {
      if (duration == 0) {
        const int ja = static_cast<int>(std::lround(a / half));
        if (ja > last_instant_flip && std::abs(a - Scalar(ja) * half) <= eps) {
          v = -eta * v;
          last_instant_flip = ja;
        }
      }
      const Scalar magnitude = std::abs(dq);
      const Scalar room = (dq >= 0 ? v_clamp - v : v + v_clamp) * c_p;
      Scalar to_cap = std::clamp(room, Scalar(0), magnitude);
      if (to_cap == room && room > 0) {
        v = dq >= 0 ? v_clamp : -v_clamp;
      } else {
        v += (dq >= 0 ? to_cap : -to_cap) / c_p;
      }
      if (tally) {
        q_cap += to_cap;
        q_store += magnitude - to_cap;
      }
    }
    if (tally) q_total += std::abs(dq);

    if (next_sample <= n_steps && std::abs(b - Scalar(next_sample) * dt) <= eps) {
      trace.t[next_sample] = Scalar(next_sample) * dt;
      trace.i_p[next_sample] = source.current(trace.t[next_sample]);
      trace.v_pt[next_sample] = v;
      ++next_sample;
    }
  }

  PowerResult<Scalar>& power = sim.power;
  power.v_s = v_s;
  power.q_half = q_total / Scalar(2);
  power.q_flip_waste = q_waste / Scalar(2);
  power.q_reflip = q_cap / Scalar(2);
  power.q_out = q_store / Scalar(2);
  power.p_out = Scalar(2) * source.f_res * v_s * power.q_out;
  return sim;
}

namespace detail {
/// Trapezoidal integral of |I_P| over [lo, hi] from the trace samples.
template <typename Scalar>
Scalar integrate_abs_current(const Trace<Scalar>& trace, Scalar lo, Scalar hi) {
  if (!(hi > lo)) return Scalar(0);
  const auto& t = trace.t;
  const auto& i = trace.i_p;
  auto at = [&](Scalar x) {
    const auto* it = std::upper_bound(t.data(), t.data() + t.size(), x);
    Eigen::Index n = std::clamp<Eigen::Index>((it - t.data()) - 1, 0, t.size() - 2);
    const Scalar w = (x - t[n]) / (t[n + 1] - t[n]);
    return i[n] + w * (i[n + 1] - i[n]);
  };
  Scalar total{0};
  Scalar x0 = lo;
  Scalar y0 = std::abs(at(lo));
  const auto* first = std::upper_bound(t.data(), t.data() + t.size(), lo);
  for (Eigen::Index n = first - t.data(); n < t.size() && t[n] < hi; ++n) {
    total += (t[n] - x0) * (y0 + std::abs(i[n])) / Scalar(2);
    x0 = t[n];
    y0 = std::abs(i[n]);
  }
  total += (hi - x0) * (y0 + std::abs(at(hi))) / Scalar(2);
  return total;
}
}  // namespace detail

template <typename Scalar = double>
struct FlipLoss {
  Scalar q_flip_waste{0};       // per half cycle
  Scalar fraction_of_q_half{0};
};

/// Charge lost during flips in the last cycle of the trace, per half cycle.
template <typename Scalar>
FlipLoss<Scalar> flip_energy_loss(const Trace<Scalar>& trace) {
  if (trace.n_cycles < 1 || trace.size() < 3 || !(trace.period > 0)) {
    throw std::invalid_argument("trace has no completed cycle");
  }
  const Scalar t1 = Scalar(trace.n_cycles) * trace.period;
  const Scalar t0 = t1 - trace.period;
  if (trace.t[0] > t0 || trace.t[trace.size() - 1] < t1 * (Scalar(1) - Scalar(1e-12))) {
    throw std::invalid_argument("trace has no completed cycle");
  }
  const Scalar q_cycle = detail::integrate_abs_current(trace, t0, t1);
  Scalar waste{0};
  for (const auto& w : trace.flips) {
    waste += detail::integrate_abs_current(trace, std::max(w.start, t0), std::min(w.end, t1));
  }
  FlipLoss<Scalar> out;
  out.q_flip_waste = waste / Scalar(2);
  out.fraction_of_q_half = q_cycle > 0 ? waste / q_cycle : Scalar(0);
  return out;
}

/// SSHC rectifier whose flip efficiency and flip time follow from the bank
/// configuration.
template <typename Scalar>
RectifierModel<Scalar> make_sshc_model(const PiezoSource<Scalar>& source, const SshcConfig<Scalar>& config,
                                       const SettlingModel<Scalar>& settle = {},
                                       const SolverOptions<Scalar>& options = {}) {
  const auto flip = steady_state_efficiency(source, config, settle, options);
  return RectifierModel<Scalar>::sshc(flip.efficiency, timing_report(source, config).t_flip);
}

}  // namespace sshc
