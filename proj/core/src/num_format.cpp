#include "spasel/num_format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace spasel {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int decimals) {
  if (!std::isfinite(v)) return "--";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace spasel
