#include "jetyak/vehicle/servo.hpp"

#include <algorithm>
#include <stdexcept>

namespace jetyak {

ServoCalibration::ServoCalibration(double min_us, double trim_us, double max_us, bool reversed)
    : min_us_(min_us), trim_us_(trim_us), max_us_(max_us), reversed_(reversed) {
  if (!(800.0 <= min_us && min_us < trim_us && trim_us < max_us && max_us <= 2200.0)) {
    throw std::invalid_argument("servo calibration requires 800 <= min < trim < max <= 2200");
  }
}

double pwm_to_normalized(PwmSignal sig, const ServoCalibration& cal) {
  const double p = std::clamp(sig.pulse_us, cal.min_us(), cal.max_us());
  double f = p >= cal.trim_us() ? (p - cal.trim_us()) / (cal.max_us() - cal.trim_us())
                                : (p - cal.trim_us()) / (cal.trim_us() - cal.min_us());
  return cal.reversed() ? -f : f;
}

PwmSignal normalized_to_pwm(double fraction, const ServoCalibration& cal) {
  double f = std::clamp(fraction, -1.0, 1.0);
  if (cal.reversed()) f = -f;
  const double span = f >= 0.0 ? cal.max_us() - cal.trim_us() : cal.trim_us() - cal.min_us();
  return PwmSignal{cal.trim_us() + f * span};
}

}  // namespace jetyak
