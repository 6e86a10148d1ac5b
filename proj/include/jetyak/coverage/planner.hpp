#pragma once

#include <string>
#include <vector>

#include "jetyak/coverage/dubins.hpp"
#include "jetyak/coverage/polygon.hpp"
#include "jetyak/world/angles.hpp"

namespace jetyak {

struct SurveyArea {
  Polygon boundary;            // simple, counterclockwise
  double swath = 10.0;         // m
  double transect_heading = 0; // rad clockwise from north; 0 = north-south lines
};

struct Transect {
  LocalPoint start;
  LocalPoint end;
  double length() const { return (end - start).norm(); }
};

// Parallel transects spaced one swath apart, centred across the polygon and
// ordered for back-and-forth traversal. Each transect spans the polygon's
// extent within its own swath strip. An area narrower than one swath gets a
// single centre line. Throws std::invalid_argument for invalid areas.
std::vector<Transect> transects(const SurveyArea& area);

struct PartitionResult {
  std::vector<Polygon> parts;
  int k = 1;
  std::vector<std::string> warnings;
};

// Splits the area into k slabs of equal area using cuts parallel to the
// transects, found by bisection. k is reduced when it exceeds the number of
// transects.
PartitionResult partition(const SurveyArea& area, int k);

enum class LegKind { Approach, Transect, Turn, Return };

struct PlannedWaypoint {
  LocalPoint pos;
  LegKind leg;  // kind of the leg that ends at this waypoint
};

struct VehiclePlan {
  Polygon area;
  std::vector<Transect> transects;
  std::vector<PlannedWaypoint> waypoints;
  double length = 0.0;  // polyline length through the waypoints, m

  std::vector<LocalPoint> points() const;
};

struct PlanOptions {
  int min_turn_waypoints = 5;  // interior waypoints per Dubins connection
  double max_spacing = 3.0;    // m between consecutive turn waypoints
};

struct CoveragePlan {
  std::vector<VehiclePlan> vehicles;
  double r_min = 5.0;
  double swath = 10.0;
  double coverage_ratio = 0.0;
  std::vector<std::string> warnings;
};

// Boustrophedon coverage for k Dubins vehicles. Each vehicle approaches its
// slab from its entry point, runs its transects joined by Dubins turns and
// returns to the entry point. `entries` needs one point per vehicle (the
// last entry is reused if fewer are given).
CoveragePlan plan(const SurveyArea& area, int k, double r_min, const std::vector<LocalPoint>& entries,
                  const PlanOptions& options = {});

// Fraction of polygon cells (square cells of side `cell`) whose centres lie
// within swath/2 of any of the polylines.
double coverage_ratio(const Polygon& area, const std::vector<std::vector<LocalPoint>>& tracks,
                      double swath, double cell);

// Smallest circumradius over consecutive waypoint triples.
double min_turn_radius(const std::vector<LocalPoint>& waypoints);

}  // namespace jetyak
