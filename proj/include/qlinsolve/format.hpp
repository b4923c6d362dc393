#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

#include "qlinsolve/error.hpp"

namespace qls {

// 17 significant digits: round-trips every finite double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw Error("not a number: '" + s + "'");
  return v;
}

}  // namespace qls
