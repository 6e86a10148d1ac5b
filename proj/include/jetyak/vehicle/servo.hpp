#pragma once

namespace jetyak {

// Pulse widths (microseconds) that map a servo channel onto its physical travel.
class ServoCalibration {
 public:
  ServoCalibration() = default;
  // Throws std::invalid_argument unless 800 <= min < trim < max <= 2200.
  ServoCalibration(double min_us, double trim_us, double max_us, bool reversed = false);

  double min_us() const { return min_us_; }
  double trim_us() const { return trim_us_; }
  double max_us() const { return max_us_; }
  bool reversed() const { return reversed_; }

 private:
  double min_us_ = 1100.0;
  double trim_us_ = 1500.0;
  double max_us_ = 1900.0;
  bool reversed_ = false;
};

struct PwmSignal {
  double pulse_us = 1500.0;

  friend bool operator==(const PwmSignal&, const PwmSignal&) = default;
};

// Piecewise-linear map: min -> -1, trim -> 0, max -> +1, sign flipped when
// reversed. Out-of-range pulses are clamped first.
double pwm_to_normalized(PwmSignal sig, const ServoCalibration& cal);

// Inverse of pwm_to_normalized; the fraction is clamped to [-1, 1].
PwmSignal normalized_to_pwm(double fraction, const ServoCalibration& cal);

}  // namespace jetyak
