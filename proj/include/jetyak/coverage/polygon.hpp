#pragma once

#include <vector>

#include "jetyak/world/frames.hpp"
#include "jetyak/world/geo.hpp"

namespace jetyak {

// Simple polygon in the local frame, vertices in order, not closed (the first
// vertex is not repeated).
using Polygon = std::vector<LocalPoint>;

double signed_area(const Polygon& poly);  // positive when counterclockwise
double area(const Polygon& poly);
double perimeter(const Polygon& poly);
bool is_simple(const Polygon& poly);
bool contains(const Polygon& poly, const LocalPoint& p);

// Checks >= 3 vertices, finite, simple and non-degenerate; returns the
// polygon oriented counterclockwise. Throws std::invalid_argument otherwise.
Polygon normalized_polygon(Polygon poly);

// Part of `poly` where normal . x <= offset (Sutherland-Hodgman).
Polygon clip_half_plane(const Polygon& poly, const Vector2& normal, double offset);

// Distance from a point to a polyline (or a single point).
double distance_to_polyline(const std::vector<LocalPoint>& line, const LocalPoint& p);

// Circumradius of a point triple; infinity when collinear.
double circumradius(const LocalPoint& a, const LocalPoint& b, const LocalPoint& c);

}  // namespace jetyak
