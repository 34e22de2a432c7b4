#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace svsim {

// Virtual time in integer nanoseconds. Seconds only appear at the edges
// (config parsing and reporting).
using TimeNs = std::int64_t;

inline constexpr TimeNs kNsPerSecond = 1'000'000'000;
inline constexpr TimeNs kNever = std::numeric_limits<TimeNs>::max();

inline TimeNs from_seconds(double s) {
  return static_cast<TimeNs>(std::llround(s * static_cast<double>(kNsPerSecond)));
}

inline constexpr double to_seconds(TimeNs t) {
  return static_cast<double>(t) / static_cast<double>(kNsPerSecond);
}

}  // namespace svsim
