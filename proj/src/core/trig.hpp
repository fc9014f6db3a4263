// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

namespace projdens::detail {

// cos(pi t) and sin(pi t) with argument reduction in units of pi, so that
// half-integer and integer arguments give exact zeros.
inline double cos_pi(double t) noexcept {
  t = std::fabs(std::fmod(t, 2.0));
  if (t > 1.0) t = 2.0 - t;
  if (t == 0.5) return 0.0;
  if (t < 0.25) return std::cos(std::numbers::pi * t);
  if (t < 0.75) return std::sin(std::numbers::pi * (0.5 - t));
  return -std::cos(std::numbers::pi * (1.0 - t));
}

inline double sin_pi(double t) noexcept {
  double s = std::fmod(t, 2.0);
  if (s < 0.0) s += 2.0;
  double sign = 1.0;
  if (s >= 1.0) {
    s -= 1.0;
    sign = -1.0;
  }
  if (s == 0.0) return 0.0;
  if (s <= 0.25) return sign * std::sin(std::numbers::pi * s);
  if (s < 0.75) return sign * std::cos(std::numbers::pi * (s - 0.5));
  return sign * std::sin(std::numbers::pi * (1.0 - s));
}

} // namespace projdens::detail
