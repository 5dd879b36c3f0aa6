#pragma once

// Small text helpers shared by the serialization, config, and CSV code.
// Numeric formatting goes through std::to_chars so output is shortest
// round-trip, locale-independent, and identical run to run.

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tfm/common.hpp"

namespace tfm::detail {

inline std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const std::size_t e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline double parse_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  double v = 0.0;
  const std::from_chars_result res =
      std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw InvalidArgument("cannot parse '" + t + "' as a number for " + what);
  }
  return v;
}

inline long long parse_int(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  long long v = 0;
  const std::from_chars_result res =
      std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw InvalidArgument("cannot parse '" + t + "' as an integer for " +
                          what);
  }
  return v;
}

}  // namespace tfm::detail
