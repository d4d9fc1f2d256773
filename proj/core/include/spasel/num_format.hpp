#pragma once

#include <string>

namespace spasel {

// Shortest decimal string that round-trips to the same double. NaN and
// infinities render as an empty string (CSV "missing").
std::string format_double(double v);

// Fixed decimals for human-facing tables; NaN renders as "--".
std::string format_fixed(double v, int decimals);

}  // namespace spasel
