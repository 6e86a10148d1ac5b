#include "jetyak/coverage/dubins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jetyak/world/angles.hpp"

namespace jetyak {

namespace {

// Internally: math angles, counterclockwise from east.
struct MathPose {
  Vector2 p;
  double theta;
};

MathPose to_math(const Pose& pose) { return {pose.pos, kPi<double> / 2.0 - pose.psi}; }

Vector2 dir(double theta) { return {std::cos(theta), std::sin(theta)}; }
Vector2 left_of(const Vector2& v) { return {-v.y(), v.x()}; }

// +1 for counterclockwise (Left), -1 for clockwise (Right).
double turn_sign(SegmentKind k) { return k == SegmentKind::Left ? 1.0 : -1.0; }

Vector2 circle_center(const MathPose& pose, double r, SegmentKind k) {
  return pose.p + turn_sign(k) * r * left_of(dir(pose.theta));
}

// Arc angle turning from heading a to heading b in the given direction.
double arc_angle(double from, double to, SegmentKind k) {
  double a = k == SegmentKind::Left ? wrap_two_pi(to - from) : wrap_two_pi(from - to);
  if (a > kTwoPi<double> - 1e-10) a = 0.0;
  return a;
}

// Heading of motion at point x on a circle centred at c.
double tangent_heading(const Vector2& c, const Vector2& x, SegmentKind k) {
  const Vector2 radial = x - c;
  const Vector2 t = k == SegmentKind::Left ? left_of(radial) : Vector2(-left_of(radial));
  return std::atan2(t.y(), t.x());
}

std::array<SegmentKind, 3> word_segments(DubinsWord w) {
  using S = SegmentKind;
  switch (w) {
    case DubinsWord::LSL: return {S::Left, S::Straight, S::Left};
    case DubinsWord::RSR: return {S::Right, S::Straight, S::Right};
    case DubinsWord::LSR: return {S::Left, S::Straight, S::Right};
    case DubinsWord::RSL: return {S::Right, S::Straight, S::Left};
    case DubinsWord::RLR: return {S::Right, S::Left, S::Right};
    case DubinsWord::LRL: return {S::Left, S::Right, S::Left};
  }
  return {S::Left, S::Straight, S::Left};
}

std::optional<std::array<double, 3>> solve_csc(const MathPose& a, const MathPose& b, double r,
                                               SegmentKind first, SegmentKind last) {
  const Vector2 c1 = circle_center(a, r, first);
  const Vector2 c2 = circle_center(b, r, last);
  const Vector2 v = c2 - c1;
  const double d = v.norm();
  const double phi = std::atan2(v.y(), v.x());
  double gamma;
  double straight;
  if (first == last) {
    if (d < 1e-12) {
      gamma = b.theta;
      straight = 0.0;
    } else {
      gamma = phi;
      straight = d;
    }
  } else {
    if (d < 2.0 * r) return std::nullopt;
    const double offset = std::asin(std::min(1.0, 2.0 * r / d));
    gamma = first == SegmentKind::Left ? phi + offset : phi - offset;
    straight = std::sqrt(std::max(0.0, d * d - 4.0 * r * r));
  }
  return std::array<double, 3>{r * arc_angle(a.theta, gamma, first), straight,
                               r * arc_angle(gamma, b.theta, last)};
}

std::optional<std::array<double, 3>> solve_ccc(const MathPose& a, const MathPose& b, double r,
                                               SegmentKind outer) {
  const Vector2 c1 = circle_center(a, r, outer);
  const Vector2 c2 = circle_center(b, r, outer);
  const Vector2 v = c2 - c1;
  const double d = v.norm();
  if (d > 4.0 * r || d < 1e-12) return std::nullopt;
  const SegmentKind middle = outer == SegmentKind::Left ? SegmentKind::Right : SegmentKind::Left;
  const double h = std::sqrt(std::max(0.0, 4.0 * r * r - d * d / 4.0));
  const Vector2 mid = c1 + v / 2.0;
  const Vector2 perp = left_of(v / d);
  std::optional<std::array<double, 3>> best;
  for (double side : {1.0, -1.0}) {
    const Vector2 cm = mid + side * h * perp;
    const Vector2 t1 = (c1 + cm) / 2.0;
    const Vector2 t2 = (cm + c2) / 2.0;
    const double h1 = tangent_heading(c1, t1, outer);
    const double h2 = tangent_heading(cm, t2, middle);
    const std::array<double, 3> lens{r * arc_angle(a.theta, h1, outer), r * arc_angle(h1, h2, middle),
                                     r * arc_angle(h2, b.theta, outer)};
    if (!best || lens[0] + lens[1] + lens[2] < (*best)[0] + (*best)[1] + (*best)[2]) best = lens;
  }
  return best;
}

}  // namespace

std::string_view to_string(DubinsWord w) {
  switch (w) {
    case DubinsWord::LSL: return "LSL";
    case DubinsWord::RSR: return "RSR";
    case DubinsWord::LSR: return "LSR";
    case DubinsWord::RSL: return "RSL";
    case DubinsWord::RLR: return "RLR";
    case DubinsWord::LRL: return "LRL";
  }
  return "?";
}

std::array<SegmentKind, 3> DubinsPath::segments() const { return word_segments(word); }

Pose DubinsPath::sample(double s) const {
  s = std::clamp(s, 0.0, length());
  MathPose p = to_math(start);
  const auto segs = segments();
  for (int k = 0; k < 3 && s > 0.0; ++k) {
    const double l = std::min(s, lengths[k]);
    s -= l;
    if (segs[k] == SegmentKind::Straight) {
      p.p += l * dir(p.theta);
    } else {
      const double sign = turn_sign(segs[k]);
      const Vector2 c = p.p + sign * radius * left_of(dir(p.theta));
      const double a = sign * l / radius;
      p.theta += a;
      p.p = c - sign * radius * left_of(dir(p.theta));
    }
  }
  return Pose{p.p, wrap_two_pi(kPi<double> / 2.0 - p.theta)};
}

std::optional<DubinsPath> dubins_word(const Pose& a, const Pose& b, double r_min, DubinsWord word) {
  if (!(r_min > 0.0)) throw std::invalid_argument("dubins: r_min must be > 0");
  const MathPose ma = to_math(a);
  const MathPose mb = to_math(b);
  const auto segs = word_segments(word);
  std::optional<std::array<double, 3>> lens =
      segs[1] == SegmentKind::Straight ? solve_csc(ma, mb, r_min, segs[0], segs[2])
                                       : solve_ccc(ma, mb, r_min, segs[0]);
  if (!lens) return std::nullopt;
  return DubinsPath{a, r_min, word, *lens};
}

DubinsPath dubins_connect(const Pose& a, const Pose& b, double r_min) {
  std::optional<DubinsPath> best;
  for (DubinsWord w : {DubinsWord::LSL, DubinsWord::RSR, DubinsWord::LSR, DubinsWord::RSL,
                       DubinsWord::RLR, DubinsWord::LRL}) {
    auto p = dubins_word(a, b, r_min, w);
    if (p && (!best || p->length() < best->length())) best = p;
  }
  // LSL and RSR always exist, so best is set.
  return *best;
}

}  // namespace jetyak
