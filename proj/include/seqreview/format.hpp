#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

namespace seqreview {

/// Shortest round-trip decimal form of a double, independent of the locale.
/// Infinities print as "inf"/"-inf" and NaN as "nan".
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

/// Fixed-precision form, used for human-facing tables.
inline std::string format_fixed(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[128];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

/// Locale-free parse accepting "inf", "-inf", "+inf" and ordinary decimals.
/// Returns false on trailing garbage.
inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s == "inf" || s == "infinity") {
    out = HUGE_VAL;
    return true;
  }
  if (s == "-inf" || s == "-infinity") {
    out = -HUGE_VAL;
    return true;
  }
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace seqreview
