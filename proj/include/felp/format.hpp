#pragma once

#include <string>

namespace felp {

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Fixed-point with the given number of decimals.
std::string format_fixed(double v, int decimals);

} // namespace felp
