#include "jetyak/coverage/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jetyak {

namespace {

struct Axes {
  Vector2 along;   // transect direction
  Vector2 across;  // to the right of `along`
};

Axes axes_for(double heading) {
  const Vector2 along = heading_vector(heading);
  return {along, Vector2(along.y(), -along.x())};
}

void validate_area(const SurveyArea& area) {
  if (!(area.swath > 0.0) || !std::isfinite(area.swath)) {
    throw std::invalid_argument("survey swath must be > 0");
  }
  if (!std::isfinite(area.transect_heading)) throw std::invalid_argument("transect heading not finite");
  normalized_polygon(area.boundary);
}

// Range of the `along` coordinate of the polygon restricted to across in [lo, hi].
std::pair<double, double> along_extent(const Polygon& poly, const Axes& ax, double lo, double hi) {
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  auto take = [&](const LocalPoint& p) {
    const double v = ax.along.dot(p);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  };
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const LocalPoint& a = poly[k];
    const LocalPoint& b = poly[(k + 1) % n];
    const double ua = ax.across.dot(a);
    const double ub = ax.across.dot(b);
    if (ua >= lo && ua <= hi) take(a);
    for (double edge : {lo, hi}) {
      if ((ua - edge) * (ub - edge) < 0.0) take(a + (edge - ua) / (ub - ua) * (b - a));
    }
  }
  return {vmin, vmax};
}

std::pair<double, double> across_extent(const Polygon& poly, const Axes& ax) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const LocalPoint& p : poly) {
    lo = std::min(lo, ax.across.dot(p));
    hi = std::max(hi, ax.across.dot(p));
  }
  return {lo, hi};
}

int transect_count(double width, double swath) {
  if (width <= swath) return 1;
  return static_cast<int>(std::ceil(width / swath - 1e-9));
}

void append_dubins(std::vector<PlannedWaypoint>& out, const Pose& from, const Pose& to, double r_min,
                   LegKind kind, const PlanOptions& options) {
  const DubinsPath path = dubins_connect(from, to, r_min);
  const double len = path.length();
  if (len <= 1e-9) return;
  const int interior = std::max(options.min_turn_waypoints,
                                static_cast<int>(std::ceil(len / options.max_spacing)) - 1);
  for (int k = 1; k <= interior; ++k) {
    const double s = len * k / (interior + 1);
    out.push_back({path.sample(s).pos, kind});
  }
  out.push_back({to.pos, kind});
}

double polyline_length(const std::vector<LocalPoint>& pts) {
  double s = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) s += (pts[k] - pts[k - 1]).norm();
  return s;
}

}  // namespace

std::vector<Transect> transects(const SurveyArea& area) {
  validate_area(area);
  const Polygon poly = normalized_polygon(area.boundary);
  const Axes ax = axes_for(area.transect_heading);
  const auto [umin, umax] = across_extent(poly, ax);
  const double width = umax - umin;
  const double s = area.swath;
  const int n = transect_count(width, s);
  const double first = umin + 0.5 * (width - (n - 1) * s);

  std::vector<Transect> out;
  for (int i = 0; i < n; ++i) {
    const double u = first + i * s;
    const double lo = n == 1 ? umin : std::max(umin, u - 0.5 * s);
    const double hi = n == 1 ? umax : std::min(umax, u + 0.5 * s);
    const auto [vmin, vmax] = along_extent(poly, ax, lo, hi);
    if (!(vmax >= vmin)) continue;
    const LocalPoint p0 = u * ax.across + vmin * ax.along;
    const LocalPoint p1 = u * ax.across + vmax * ax.along;
    if (out.size() % 2 == 0) {
      out.push_back({p0, p1});
    } else {
      out.push_back({p1, p0});
    }
  }
  return out;
}

PartitionResult partition(const SurveyArea& area, int k) {
  if (k < 1) throw std::invalid_argument("partition: k must be >= 1");
  validate_area(area);
  PartitionResult result;
  const Polygon poly = normalized_polygon(area.boundary);
  const int available = static_cast<int>(transects(area).size());
  if (k > available) {
    result.warnings.push_back("requested " + std::to_string(k) + " vehicles but the area has only " +
                              std::to_string(available) + " transects; using " +
                              std::to_string(available));
    k = available;
  }
  result.k = k;
  if (k == 1) {
    result.parts.push_back(poly);
    return result;
  }
  const Axes ax = axes_for(area.transect_heading);
  const auto [umin, umax] = across_extent(poly, ax);
  const double total = jetyak::area(poly);

  // Cut positions along `across` where the swept area reaches j/k of the total.
  std::vector<double> cuts;
  for (int j = 1; j < k; ++j) {
    const double goal = total * j / k;
    double lo = umin;
    double hi = umax;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, umax - umin); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (jetyak::area(clip_half_plane(poly, ax.across, mid)) < goal) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    cuts.push_back(0.5 * (lo + hi));
  }
  for (int j = 0; j < k; ++j) {
    Polygon part = poly;
    if (j > 0) part = clip_half_plane(part, -ax.across, -cuts[j - 1]);
    if (j < k - 1) part = clip_half_plane(part, ax.across, cuts[j]);
    result.parts.push_back(std::move(part));
  }
  return result;
}

std::vector<LocalPoint> VehiclePlan::points() const {
  std::vector<LocalPoint> out;
  out.reserve(waypoints.size());
  for (const PlannedWaypoint& w : waypoints) out.push_back(w.pos);
  return out;
}

CoveragePlan plan(const SurveyArea& area, int k, double r_min, const std::vector<LocalPoint>& entries,
                  const PlanOptions& options) {
  if (!(r_min > 0.0)) throw std::invalid_argument("plan: r_min must be > 0");
  if (entries.empty()) throw std::invalid_argument("plan: at least one entry point is required");
  if (options.min_turn_waypoints < 1 || !(options.max_spacing > 0.0)) {
    throw std::invalid_argument("plan: invalid options");
  }
  const PartitionResult parts = partition(area, k);
  CoveragePlan out;
  out.r_min = r_min;
  out.swath = area.swath;
  out.warnings = parts.warnings;

  std::vector<std::vector<LocalPoint>> tracks;
  for (std::size_t v = 0; v < parts.parts.size(); ++v) {
    const LocalPoint entry = entries[std::min(v, entries.size() - 1)];
    SurveyArea sub = area;
    sub.boundary = parts.parts[v];
    std::vector<Transect> lines = transects(sub);

    // Pick the traversal (first or last transect, either direction) with the
    // shortest approach from the entry point.
    auto flip = [](std::vector<Transect>& ts) {
      for (Transect& t : ts) std::swap(t.start, t.end);
    };
    std::vector<std::vector<Transect>> options_list;
    std::vector<Transect> fwd = lines;
    std::vector<Transect> rev(lines.rbegin(), lines.rend());
    options_list.push_back(fwd);
    flip(fwd);
    options_list.push_back(fwd);
    options_list.push_back(rev);
    flip(rev);
    options_list.push_back(rev);
    std::size_t best = 0;
    for (std::size_t o = 1; o < options_list.size(); ++o) {
      if ((options_list[o].front().start - entry).norm() <
          (options_list[best].front().start - entry).norm() - 1e-9) {
        best = o;
      }
    }
    lines = options_list[best];

    VehiclePlan vp;
    vp.area = parts.parts[v];
    vp.transects = lines;
    auto heading_of = [](const Transect& t) { return bearing(t.start, t.end); };

    const Transect& first = lines.front();
    Pose from{entry, bearing(entry, first.start)};
    if ((first.start - entry).norm() > 1e-9) {
      append_dubins(vp.waypoints, from, Pose{first.start, heading_of(first)}, r_min, LegKind::Approach,
                    options);
    } else {
      vp.waypoints.push_back({first.start, LegKind::Approach});
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const Transect& t = lines[i];
      vp.waypoints.push_back({t.end, LegKind::Transect});
      if (i + 1 < lines.size()) {
        const Transect& n = lines[i + 1];
        append_dubins(vp.waypoints, Pose{t.end, heading_of(t)}, Pose{n.start, heading_of(n)}, r_min,
                      LegKind::Turn, options);
      }
    }
    const Transect& last = lines.back();
    if ((last.end - entry).norm() > 1e-9) {
      append_dubins(vp.waypoints, Pose{last.end, heading_of(last)},
                    Pose{entry, bearing(last.end, entry)}, r_min, LegKind::Return, options);
    }

    std::vector<LocalPoint> pts{entry};
    for (const PlannedWaypoint& w : vp.waypoints) pts.push_back(w.pos);
    vp.length = polyline_length(pts);
    tracks.push_back(pts);
    out.vehicles.push_back(std::move(vp));
  }
  out.coverage_ratio =
      coverage_ratio(normalized_polygon(area.boundary), tracks, area.swath, area.swath / 4.0);
  return out;
}

double coverage_ratio(const Polygon& area, const std::vector<std::vector<LocalPoint>>& tracks,
                      double swath, double cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("coverage_ratio: cell must be > 0");
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = xmin;
  double xmax = -xmin;
  double ymax = -xmin;
  for (const LocalPoint& p : area) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  std::size_t inside = 0;
  std::size_t covered = 0;
  const double reach = 0.5 * swath + 1e-9;
  for (double x = xmin + 0.5 * cell; x < xmax; x += cell) {
    for (double y = ymin + 0.5 * cell; y < ymax; y += cell) {
      const LocalPoint c(x, y);
      if (!contains(area, c)) continue;
      ++inside;
      for (const auto& track : tracks) {
        if (distance_to_polyline(track, c) <= reach) {
          ++covered;
          break;
        }
      }
    }
  }
  return inside ? static_cast<double>(covered) / static_cast<double>(inside) : 0.0;
}

double min_turn_radius(const std::vector<LocalPoint>& waypoints) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 2 < waypoints.size(); ++k) {
    best = std::min(best, circumradius(waypoints[k], waypoints[k + 1], waypoints[k + 2]));
  }
  return best;
}

}  // namespace jetyak
