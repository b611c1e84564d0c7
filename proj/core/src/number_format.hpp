#pragma once

#include <charconv>
#include <string>

namespace ustrack::detail {

/// Shortest decimal that round-trips to the same double.
inline std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace ustrack::detail
