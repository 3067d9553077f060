#pragma once

#include <cmath>
#include <string_view>

namespace cbm {

/// How a barrier crossing is detected on a time grid.
///
/// `discrete`: first grid point at or beyond the barrier.
/// `corrected`: same rule against a barrier moved toward the process by
/// kContinuityShift * sigma * sqrt(dt) (Broadie-Glasserman-Kou), which makes
/// discrete detection approximate continuous-time first passage to O(dt).
enum class Monitoring { discrete, corrected };

/// -zeta(1/2) / sqrt(2 pi)
inline constexpr double kContinuityShift = 0.5825971579390106;

/// Effective level for an upward crossing of `level` by a process with
/// local volatility `sigma`.
inline double upper_trigger(double level, double sigma, double dt, Monitoring m) {
  return m == Monitoring::corrected ? level - kContinuityShift * sigma * std::sqrt(dt) : level;
}

/// Effective level for a downward crossing.
inline double lower_trigger(double level, double sigma, double dt, Monitoring m) {
  return m == Monitoring::corrected ? level + kContinuityShift * sigma * std::sqrt(dt) : level;
}

Monitoring parse_monitoring(std::string_view name);
std::string_view to_string(Monitoring m);

}  // namespace cbm
