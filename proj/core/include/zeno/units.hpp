#pragma once

// Unit conventions: the core works in seconds and angular frequency (rad/s).
// Microseconds and ordinary kHz only appear at the config / CSV boundary.

#include <numbers>

namespace zeno::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Ordinary frequency in kHz -> angular frequency in rad/s.
constexpr double khz_to_angular(double khz) { return two_pi * 1e3 * khz; }
constexpr double angular_to_khz(double omega) { return omega / (two_pi * 1e3); }

constexpr double us_to_s(double us) { return us * 1e-6; }
constexpr double s_to_us(double s) { return s * 1e6; }

}  // namespace zeno::units
