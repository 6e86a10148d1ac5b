#pragma once

#include <string>
#include <vector>

#include "jetyak/autopilot/guidance.hpp"
#include "jetyak/autopilot/pid.hpp"
#include "jetyak/vehicle/vehicle.hpp"

namespace jetyak {

// Scripted calm-water trials used to judge a set of gains.
struct TuneMetrics {
  int oscillations = 0;         // line crossings before settling
  double settle_time = 0.0;     // s
  double turn_time_ratio = 0.0; // 80-degree turn time / ideal full-deflection time
  double chatter_rate = 0.0;    // steering sign flips per second
  double bias = 0.0;            // mean cross-track error once settled, m
  double corner_overshoot = 0.0;// outside excursion after a 90-degree corner, m
  double corner_cut = 0.0;      // closest approach to the corner waypoint, m
  bool corner_reached = false;
};

struct TuneCriteria {
  int max_oscillations = 3;
  double max_turn_time_ratio = 2.0;
  double max_chatter_rate = 0.5;
  double max_bias = 0.5;
  double max_corner_overshoot = 7.5;
  double max_corner_cut = 5.0;
};

struct TuneConfig {
  double speed = 3.0;        // m/s trial speed
  double line_offset = 20.0; // m, initial distance from the target line
  double dt = 0.05;
  int max_iterations = 40;
  GuidanceConfig guidance;
  TuneCriteria criteria;
};

struct TuneResult {
  PidGains gains;
  TuneMetrics metrics;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> log;  // one line per adjustment
};

TuneMetrics evaluate_gains(const VehicleParams& params, const PidGains& gains,
                           const TuneConfig& config = {});

bool meets_criteria(const TuneMetrics& m, const TuneCriteria& c);

// Automated version of the manual calm-water PID procedure: raise P when the
// boat turns too slowly, lower P / raise D on overshoot, lower D on chatter,
// adjust I for bias and the waypoint radius for late/early turns. Returns the
// input unchanged when it already passes. Stops after max_iterations with the
// best gains seen.
TuneResult auto_tune(const VehicleParams& params, const PidGains& initial,
                     const TuneConfig& config = {});

}  // namespace jetyak
