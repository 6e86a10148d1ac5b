#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "jetyak/world/frames.hpp"
#include "jetyak/world/geo.hpp"

namespace jetyak {

// Position plus marine heading (radians clockwise from north).
struct Pose {
  LocalPoint pos = LocalPoint::Zero();
  double psi = 0.0;
};

enum class DubinsWord { LSL, RSR, LSR, RSL, RLR, LRL };
enum class SegmentKind { Left, Straight, Right };  // Left = counterclockwise (port)

std::string_view to_string(DubinsWord w);

struct DubinsPath {
  Pose start;
  double radius = 1.0;
  DubinsWord word = DubinsWord::LSL;
  std::array<double, 3> lengths{};  // meters per segment

  double length() const { return lengths[0] + lengths[1] + lengths[2]; }
  std::array<SegmentKind, 3> segments() const;
  // Pose after travelling s meters along the path (clamped to [0, length]).
  Pose sample(double s) const;
};

// Shortest bounded-curvature path from `a` to `b` among the six Dubins words.
DubinsPath dubins_connect(const Pose& a, const Pose& b, double r_min);

// Shortest path of one specific word, if that word is feasible.
std::optional<DubinsPath> dubins_word(const Pose& a, const Pose& b, double r_min, DubinsWord word);

}  // namespace jetyak
