#pragma once

#include <cmath>

namespace canopy {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wrap an angle in degrees to [-180, 180).
inline double wrap_deg(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  return w - 180.0;
}

/// Wrap an angle in radians to [-pi, pi).
inline double wrap_rad(double rad) {
  double w = std::fmod(rad + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

/// Shortest signed difference a - b in degrees, in [-180, 180).
inline double ang_diff_deg(double a, double b) { return wrap_deg(a - b); }

}  // namespace canopy
