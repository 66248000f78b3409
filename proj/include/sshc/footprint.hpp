#pragma once

// On-chip MIM area of the capacitor bank and its volume against the
// reference SSHI inductor.

#include <limits>
#include <stdexcept>

#include "sshc/core.hpp"

namespace sshc {

template <typename Scalar = double>
struct ProcessParams {
  Scalar mim_density{2};  // fF/um^2

  friend bool operator==(const ProcessParams&, const ProcessParams&) = default;
};

/// Volume of the 5.6 mH inductor an SSHI rectifier needs for an 80 % flip.
inline constexpr double reference_inductor_volume_mm3 = 1000.0;
inline constexpr double default_chip_thickness_mm = 0.3;

template <typename Scalar>
ValidationReport validate(const ProcessParams<Scalar>& process) {
  ValidationReport report;
  if (!(process.mim_density > 0)) report.errors.emplace_back("mim_density must be positive");
  return report;
}

/// Area in mm^2. 1 fF/um^2 is 1e-9 F/mm^2.
template <typename Scalar>
Scalar mim_area(Scalar c, const ProcessParams<Scalar>& process = {}) {
  require_valid(process);
  if (!(c >= 0)) throw std::invalid_argument("capacitance must be non-negative");
  return c / (process.mim_density * Scalar(1e-9));
}

template <typename Scalar>
Scalar bank_area(const SshcConfig<Scalar>& config, const ProcessParams<Scalar>& process = {}) {
  require_valid(config);
  Scalar total{0};
  for (Eigen::Index i = 0; i < config.bank.size(); ++i) total += mim_area(config.bank[i], process);
  return total;
}

template <typename Scalar = double>
struct InductorComparison {
  Scalar bank_volume_mm3{0};
  Scalar inductor_volume_mm3{0};
  Scalar ratio{0};  // inductor / bank; +inf for an empty bank
};

template <typename Scalar>
InductorComparison<Scalar> inductor_comparison(Scalar bank_area_mm2,
                                               Scalar chip_thickness_mm = Scalar(default_chip_thickness_mm)) {
  if (!(chip_thickness_mm > 0)) throw std::invalid_argument("chip_thickness must be positive");
  if (!(bank_area_mm2 >= 0)) throw std::invalid_argument("bank area must be non-negative");
  InductorComparison<Scalar> out;
  out.bank_volume_mm3 = bank_area_mm2 * chip_thickness_mm;
  out.inductor_volume_mm3 = Scalar(reference_inductor_volume_mm3);
  out.ratio = out.bank_volume_mm3 > 0 ? out.inductor_volume_mm3 / out.bank_volume_mm3
                                      : std::numeric_limits<Scalar>::infinity();
  return out;
}

}  // namespace sshc
