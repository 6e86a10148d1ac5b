#include "jetyak/coverage/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jetyak {

namespace {

double cross(const Vector2& a, const Vector2& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const LocalPoint& a, const LocalPoint& b, const LocalPoint& c) {
  const double v = cross(b - a, c - a);
  if (std::abs(v) < 1e-12) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(const LocalPoint& a, const LocalPoint& b, const LocalPoint& p) {
  return std::min(a.x(), b.x()) - 1e-12 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
         std::min(a.y(), b.y()) - 1e-12 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-12;
}

bool segments_intersect(const LocalPoint& p1, const LocalPoint& p2, const LocalPoint& q1,
                        const LocalPoint& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

double point_segment_distance(const LocalPoint& a, const LocalPoint& b, const LocalPoint& p) {
  const Vector2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp(d.dot(p - a) / len2, 0.0, 1.0);
  return (a + t * d - p).norm();
}

}  // namespace

double signed_area(const Polygon& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) s += cross(poly[k], poly[(k + 1) % n]);
  return 0.5 * s;
}

double area(const Polygon& poly) { return std::abs(signed_area(poly)); }

double perimeter(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) s += (poly[(k + 1) % poly.size()] - poly[k]).norm();
  return s;
}

bool is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool contains(const Polygon& poly, const LocalPoint& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const LocalPoint& a = poly[i];
    const LocalPoint& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      inside = !inside;
    }
  }
  return inside;
}

Polygon normalized_polygon(Polygon poly) {
  if (poly.size() >= 2 && (poly.front() - poly.back()).norm() == 0.0) poly.pop_back();
  if (poly.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  for (const LocalPoint& p : poly) {
    if (!p.allFinite()) throw std::invalid_argument("polygon has non-finite vertices");
  }
  if (!(area(poly) > 1e-9)) throw std::invalid_argument("polygon is degenerate (zero area)");
  if (!is_simple(poly)) throw std::invalid_argument("polygon is not simple");
  if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

Polygon clip_half_plane(const Polygon& poly, const Vector2& normal, double offset) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const LocalPoint& cur = poly[k];
    const LocalPoint& nxt = poly[(k + 1) % n];
    const double dc = normal.dot(cur) - offset;
    const double dn = normal.dot(nxt) - offset;
    if (dc <= 0.0) out.push_back(cur);
    if ((dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

double distance_to_polyline(const std::vector<LocalPoint>& line, const LocalPoint& p) {
  if (line.empty()) return std::numeric_limits<double>::infinity();
  if (line.size() == 1) return (line[0] - p).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < line.size(); ++k) {
    best = std::min(best, point_segment_distance(line[k], line[k + 1], p));
  }
  return best;
}

double circumradius(const LocalPoint& a, const LocalPoint& b, const LocalPoint& c) {
  const double ab = (b - a).norm();
  const double bc = (c - b).norm();
  const double ca = (a - c).norm();
  const double twice_area = std::abs(cross(b - a, c - a));
  if (twice_area <= 1e-12 * std::max({ab * bc, bc * ca, ca * ab, 1e-300})) {
    return std::numeric_limits<double>::infinity();
  }
  return ab * bc * ca / (2.0 * twice_area);
}

}  // namespace jetyak
