#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace pcup {

/// Shortest decimal that parses back to exactly `v`.
inline std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// `%.<digits>g`.
inline std::string significant(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

} // namespace pcup
