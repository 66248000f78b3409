#pragma once

// Domain types shared by every analysis: the transducer model, the switched
// capacitor bank configuration, the instantaneous node voltages and the
// 2k+1 phase switching schedule.
//
// All quantities are plain SI values. Field names carry the unit where it is
// not obvious from the quantity (farads, hertz, ohms, volts, seconds).

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace sshc {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Piezoelectric transducer: sinusoidal current source I_P = i_amp*sin(2*pi*f_res*t)
/// in parallel with its inherent capacitance c_p. v_d is the forward drop of
/// one bridge diode, so the bridge clamps the node at +-(V_S + 2*v_d).
template <typename Scalar = double>
struct PiezoSource {
  Scalar c_p{100e-12};
  Scalar f_res{100e3};
  Scalar i_amp{10e-6};
  Scalar v_d{0};

  Scalar period() const { return Scalar(1) / f_res; }
  Scalar half_period() const { return period() / Scalar(2); }
  Scalar omega() const { return Scalar(2) * std::numbers::pi_v<Scalar> * f_res; }
  Scalar current(Scalar t) const { return i_amp * std::sin(omega() * t); }

  friend bool operator==(const PiezoSource&, const PiezoSource&) = default;
};

/// Stage count, bank capacitances C_1..C_k, total ON-resistance of the
/// two-capacitor charging loop and the number of time constants per phase.
template <typename Scalar = double>
struct SshcConfig {
  int k = 0;
  VectorX<Scalar> bank;
  Scalar r_on{0};
  Scalar settle_factor{5};

  /// k capacitors all equal to `c`.
  static SshcConfig equal_bank(int k, Scalar c, Scalar r_on = Scalar(0),
                               Scalar settle_factor = Scalar(5)) {
    SshcConfig config;
    config.k = k;
    config.bank = VectorX<Scalar>::Constant(k < 0 ? 0 : k, c);
    config.r_on = r_on;
    config.settle_factor = settle_factor;
    return config;
  }
};

/// Voltage of the transducer node and of every bank capacitor. Bank voltages
/// are measured across each capacitor's plates in the orientation used by the
/// down-flip dump phase.
template <typename Scalar = double>
struct BankState {
  Scalar v_pt{0};
  VectorX<Scalar> bank_v;

  static BankState zero(int k, Scalar v_pt = Scalar(0)) {
    return {v_pt, VectorX<Scalar>::Zero(k < 0 ? 0 : k)};
  }
};

enum class FlipDirection { down, up };

/// +1 for a positive-to-negative flip, -1 for the mirrored one.
inline constexpr int direction_sign(FlipDirection direction) {
  return direction == FlipDirection::down ? 1 : -1;
}

inline constexpr FlipDirection opposite(FlipDirection direction) {
  return direction == FlipDirection::down ? FlipDirection::up : FlipDirection::down;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Every violated invariant, one message each. Empty means valid.
struct ValidationReport {
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
  explicit operator bool() const { return ok(); }

  std::string message() const {
    std::string out;
    for (const auto& e : errors) {
      if (!out.empty()) out += "; ";
      out += e;
    }
    return out;
  }
};

template <typename Scalar>
ValidationReport validate(const PiezoSource<Scalar>& source) {
  ValidationReport report;
  // Negated comparisons so NaN is rejected too.
  if (!(source.c_p > 0)) report.errors.emplace_back("c_p must be positive");
  if (!(source.f_res > 0)) report.errors.emplace_back("f_res must be positive");
  if (!(source.i_amp > 0)) report.errors.emplace_back("i_amp must be positive");
  if (!(source.v_d >= 0)) report.errors.emplace_back("v_d must be non-negative");
  return report;
}

template <typename Scalar>
ValidationReport validate(const SshcConfig<Scalar>& config) {
  ValidationReport report;
  if (config.k < 0) report.errors.emplace_back("k must be non-negative");
  if (config.bank.size() != config.k) report.errors.emplace_back("bank length mismatch");
  for (Eigen::Index i = 0; i < config.bank.size(); ++i) {
    if (!(config.bank[i] > 0)) {
      report.errors.push_back("bank capacitor C_" + std::to_string(i + 1) + " must be positive");
    }
  }
  if (!(config.r_on >= 0)) report.errors.emplace_back("r_on must be non-negative");
  if (!(config.settle_factor > 0)) report.errors.emplace_back("settle_factor must be positive");
  return report;
}

template <typename Scalar>
ValidationReport validate(const PiezoSource<Scalar>& source, const SshcConfig<Scalar>& config) {
  ValidationReport report = validate(source);
  auto more = validate(config);
  report.errors.insert(report.errors.end(), more.errors.begin(), more.errors.end());
  return report;
}

/// Throws std::invalid_argument listing every violation.
template <typename... Ts>
void require_valid(const Ts&... values) {
  auto report = validate(values...);
  if (!report.ok()) throw std::invalid_argument(report.message());
}

// ---------------------------------------------------------------------------
// Phase schedule
// ---------------------------------------------------------------------------

enum class PhaseKind {
  dump,     // phi_ip: transducer shares charge with C_i
  clear,    // phi_0: transducer shorted
  restore,  // phi_in: C_i shares charge back with the transducer, reversed
};

enum class Polarity { same, reversed, ground };

struct Phase {
  PhaseKind kind = PhaseKind::clear;
  int capacitor = 0;  // 1-based bank index, 0 for the clearing phase
  Polarity polarity = Polarity::ground;

  std::string label() const {
    switch (kind) {
      case PhaseKind::dump: return "phi_" + std::to_string(capacitor) + "p";
      case PhaseKind::restore: return "phi_" + std::to_string(capacitor) + "n";
      case PhaseKind::clear: break;
    }
    return "phi_0";
  }

  friend bool operator==(const Phase&, const Phase&) = default;
};

struct PhaseSchedule {
  FlipDirection direction = FlipDirection::down;
  std::vector<Phase> phases;

  std::size_t size() const { return phases.size(); }
  const Phase& operator[](std::size_t i) const { return phases[i]; }
  auto begin() const { return phases.begin(); }
  auto end() const { return phases.end(); }
};

inline Polarity flipped(Polarity p) {
  switch (p) {
    case Polarity::same: return Polarity::reversed;
    case Polarity::reversed: return Polarity::same;
    case Polarity::ground: break;
  }
  return Polarity::ground;
}

/// phi_1p .. phi_kp, phi_0, phi_kn .. phi_1n. The up-flip schedule is the same
/// sequence with every connection polarity inverted.
inline PhaseSchedule build_phase_schedule(int k, FlipDirection direction = FlipDirection::down) {
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  const bool up = direction == FlipDirection::up;
  const Polarity dump = up ? Polarity::reversed : Polarity::same;

  PhaseSchedule schedule;
  schedule.direction = direction;
  schedule.phases.reserve(static_cast<std::size_t>(2 * k + 1));
  for (int i = 1; i <= k; ++i) schedule.phases.push_back({PhaseKind::dump, i, dump});
  schedule.phases.push_back({PhaseKind::clear, 0, Polarity::ground});
  for (int i = k; i >= 1; --i) schedule.phases.push_back({PhaseKind::restore, i, flipped(dump)});
  return schedule;
}

/// Number of switches driven by the schedule of a k-stage rectifier.
inline constexpr int switch_count(int k) { return 4 * k + 1; }

}  // namespace sshc
