#pragma once

// Locale-independent number formatting for tables, reports and plots.

#include <string>
#include <string_view>

namespace sshc::io {

/// Shortest round-trip text. Scientific for |x| < 1e-3 or |x| >= 1e6, fixed
/// otherwise; zero is "0".
std::string format_number(double x);

/// `digits` significant digits, trailing zeros dropped ("117.6", "0.4").
std::string format_sig(double x, int digits = 4);

/// Exactly `decimals` digits after the point.
std::string format_fixed(double x, int decimals);

/// Engineering prefix and unit: 5.882e-9, "s" -> "5.882 ns".
std::string format_si(double x, std::string_view unit, int digits = 4);

}  // namespace sshc::io
