#include "jetyak/autopilot/pid.hpp"

#include <algorithm>
#include <stdexcept>

namespace jetyak {

void PidGains::validate() const {
  if (p < 0.0 || i < 0.0 || d < 0.0 || i_clamp < 0.0) {
    throw std::invalid_argument("PID gains must be non-negative");
  }
  if (!(wp_radius > 0.0)) throw std::invalid_argument("wp_radius must be > 0");
}

double HeadingPid::update(const PidGains& gains, Heading desired, Heading actual, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("HeadingPid::update: dt must be > 0");
  const double e = desired - actual;
  const double de = has_prev_ ? wrap_angle(e - prev_error_) / dt : 0.0;
  prev_error_ = e;
  has_prev_ = true;

  const double bound = gains.i_clamp / std::max(gains.i, 1e-9);
  const double candidate = std::clamp(integral_ + e * dt, -bound, bound);
  const double raw = gains.p * e + gains.i * candidate + gains.d * de;
  // Anti-windup: hold the integral while the output is pinned in the
  // direction the error is pushing.
  const bool saturated = std::abs(raw) > 1.0 && (raw > 0.0) == (e > 0.0);
  if (!saturated) integral_ = candidate;
  const double out = gains.p * e + gains.i * integral_ + gains.d * de;
  return std::clamp(out, -1.0, 1.0);
}

void HeadingPid::reset() {
  integral_ = 0.0;
  prev_error_ = 0.0;
  has_prev_ = false;
}

}  // namespace jetyak
