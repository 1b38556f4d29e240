#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>

#include "riskforge/interval.hpp"

namespace riskforge::detail {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string shortest(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

/// Human-facing number: 12 significant digits, trailing noise removed.
inline std::string display(double v) {
  if (v == 0.0) v = 0.0;
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.12g", v);
  return buf.data();
}

inline std::string display(const Interval& x) {
  if (x.is_point()) return display(x.lo);
  return "[" + display(x.lo) + "," + display(x.hi) + "]";
}

/// `a` or `[a,b]` using shortest round-trip numbers.
inline std::string shortest(const Interval& x) {
  if (x.is_point()) return shortest(x.lo);
  return "[" + shortest(x.lo) + "," + shortest(x.hi) + "]";
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

/// CSV field, quoted only when it contains a separator, quote or newline.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

template <class Range>
std::string join(const Range& items, std::string_view sep) {
  std::string out;
  bool first = true;
  for (const auto& item : items) {
    if (!first) out += sep;
    out += item;
    first = false;
  }
  return out;
}

}  // namespace riskforge::detail
