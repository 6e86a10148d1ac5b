#pragma once

#include "jetyak/world/angles.hpp"

namespace jetyak {

struct PidGains {
  double p = 2.0;
  double i = 0.2;
  double d = 0.005;
  double i_clamp = 0.3;    // max integral contribution, as an output fraction
  double wp_radius = 5.0;  // m

  // Throws std::invalid_argument for negative gains or wp_radius <= 0.
  void validate() const;

  friend bool operator==(const PidGains&, const PidGains&) = default;
};

// Heading-hold PID producing a steering fraction in [-1, 1]. Positive output
// turns to starboard (clockwise).
class HeadingPid {
 public:
  double update(const PidGains& gains, Heading desired, Heading actual, double dt);
  void reset();

  double integral() const { return integral_; }

 private:
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool has_prev_ = false;
};

}  // namespace jetyak
