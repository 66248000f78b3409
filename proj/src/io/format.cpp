#include "sshc/io/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace sshc::io {

namespace {

std::string chars(double x, std::chars_format fmt) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, fmt);
  return {buf.data(), end};
}

std::string chars(double x, std::chars_format fmt, int precision) {
  std::array<char, 400> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, fmt, precision);
  return {buf.data(), end};
}

}  // namespace

std::string format_number(double x) {
  if (x == 0) return "0";
  const double mag = std::abs(x);
  if (!std::isfinite(x) || mag < 1e-3 || mag >= 1e6) return chars(x, std::chars_format::scientific);
  return chars(x, std::chars_format::fixed);
}

std::string format_sig(double x, int digits) { return chars(x, std::chars_format::general, digits); }

std::string format_fixed(double x, int decimals) { return chars(x, std::chars_format::fixed, decimals); }

std::string format_si(double x, std::string_view unit, int digits) {
  static constexpr std::array<std::string_view, 10> prefixes{"f", "p", "n", "\xC2\xB5", "m", "", "k", "M", "G", "T"};
  if (x == 0 || !std::isfinite(x)) return format_sig(x, digits) + " " + std::string(unit);
  int exponent = static_cast<int>(std::floor(std::log10(std::abs(x)) / 3.0)) * 3;
  exponent = std::max(-15, std::min(12, exponent));
  const double scaled = x / std::pow(10.0, exponent);
  return format_sig(scaled, digits) + " " + std::string(prefixes[static_cast<std::size_t>(exponent / 3 + 5)]) +
         std::string(unit);
}

}  // namespace sshc::io
