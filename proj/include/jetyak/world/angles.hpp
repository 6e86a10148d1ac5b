#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jetyak {

template <typename Scalar>
inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;

template <typename Scalar>
inline constexpr Scalar kTwoPi = Scalar(2) * std::numbers::pi_v<Scalar>;

// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on NaN/inf.
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  if (!std::isfinite(a)) throw std::invalid_argument("wrap_angle: non-finite angle");
  Scalar r = std::remainder(a, kTwoPi<Scalar>);
  if (r <= -kPi<Scalar>) r += kTwoPi<Scalar>;
  return r;
}

// Wraps an angle into [0, 2pi).
template <typename Scalar>
Scalar wrap_two_pi(Scalar a) {
  if (!std::isfinite(a)) throw std::invalid_argument("wrap_two_pi: non-finite angle");
  Scalar r = std::fmod(a, kTwoPi<Scalar>);
  if (r < Scalar(0)) r += kTwoPi<Scalar>;
  if (r >= kTwoPi<Scalar>) r -= kTwoPi<Scalar>;
  return r;
}

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar d) {
  return d * kPi<Scalar> / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad_to_deg(Scalar r) {
  return r * Scalar(180) / kPi<Scalar>;
}

// Marine heading: radians clockwise from true north, always held in [0, 2pi).
// Every public API in this project that takes a heading uses this convention.
class Heading {
 public:
  constexpr Heading() = default;
  explicit Heading(double radians) : psi_(wrap_two_pi(radians)) {}

  static Heading from_degrees(double deg) { return Heading(deg_to_rad(deg)); }

  double radians() const { return psi_; }
  double degrees() const { return rad_to_deg(psi_); }

  Heading operator+(double delta) const { return Heading(psi_ + delta); }
  Heading operator-(double delta) const { return Heading(psi_ - delta); }

  // Signed shortest rotation taking `from` onto `to`, in (-pi, pi].
  friend double operator-(Heading to, Heading from) { return wrap_angle(to.psi_ - from.psi_); }

  friend bool operator==(Heading a, Heading b) = default;

 private:
  double psi_ = 0.0;
};

}  // namespace jetyak
