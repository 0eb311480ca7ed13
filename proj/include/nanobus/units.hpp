#pragma once

// Physical constants (SI, exact 2019 values) and frequency conversions.
// Internally every energy is an angular frequency in rad/s with hbar = 1.

#include <cmath>
#include <numbers>

namespace nanobus::units {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kPlanck = 6.62607015e-34;             // J s
inline constexpr double kHbar = kPlanck / kTwoPi;
inline constexpr double kFluxQuantum = kPlanck / (2.0 * kElementaryCharge);  // Wb

inline constexpr double from_hz(double f) { return kTwoPi * f; }
inline constexpr double from_mhz(double f) { return kTwoPi * 1e6 * f; }
inline constexpr double from_ghz(double f) { return kTwoPi * 1e9 * f; }
inline constexpr double to_hz(double omega) { return omega / kTwoPi; }

namespace detail {

// x reduced to (-1, 1].
inline double reduce_mod2(double x) {
  double r = std::fmod(x, 2.0);
  if (r > 1.0) r -= 2.0;
  if (r <= -1.0) r += 2.0;
  return r;
}

}  // namespace detail

/// cos(pi x), exactly zero at half-integers and exactly +-1 at integers.
inline double cos_pi(double x) {
  double r = std::abs(detail::reduce_mod2(x));  // [0, 1]
  if (r == 0.5) return 0.0;
  if (r == 0.0) return 1.0;
  if (r == 1.0) return -1.0;
  if (r > 0.5) return -std::sin(std::numbers::pi * (r - 0.5));
  return std::sin(std::numbers::pi * (0.5 - r));
}

/// sin(pi x), exactly +-1 at half-integers and exactly zero at integers.
inline double sin_pi(double x) { return cos_pi(x - 0.5); }

}  // namespace nanobus::units
