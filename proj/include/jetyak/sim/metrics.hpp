#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "jetyak/sim/event_log.hpp"

namespace jetyak {

struct VehicleMetrics {
  std::uint8_t sys_id = 0;
  double xtrack_sum_sq = 0.0;      // over straight legs of at least kMinStraightLeg
  std::size_t xtrack_samples = 0;
  double xtrack_max = 0.0;
  std::size_t waypoints_total = 0;
  std::size_t waypoints_hit = 0;
  std::size_t missed_first_pass = 0;  // passed abeam of the target without entering its radius
  std::size_t never_reached = 0;
  double fuel_start = 0.0;
  double fuel_end = 0.0;
  double distance = 0.0;              // ground track length, m
  std::size_t frames_sent = 0;        // both directions
  std::size_t frames_dropped = 0;
  bool mission_complete = false;

  double xtrack_rms() const;
  double fuel_used() const { return fuel_start - fuel_end; }
  friend bool operator==(const VehicleMetrics&, const VehicleMetrics&) = default;
};

struct RunMetrics {
  std::vector<VehicleMetrics> vehicles;  // ordered by sys_id
  double duration = 0.0;
  std::size_t frames_sent = 0;
  std::size_t frames_dropped = 0;

  bool all_waypoints_hit() const;
  nlohmann::ordered_json to_json() const;
  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

inline constexpr double kMinStraightLeg = 20.0;  // m; shorter legs are turn geometry

// Folds log records into run metrics. The live run and replay feed the same
// record sequence, so both produce identical results.
class MetricsAccumulator {
 public:
  void consume(const LogRecord& record);
  RunMetrics result() const;

 private:
  struct Track {
    VehicleMetrics m;
    bool have_state = false;
    double last_x = 0.0;
    double last_y = 0.0;
    std::vector<double> xy;
    double start_x = 0.0;
    double start_y = 0.0;
    double wp_radius = 5.0;
    std::vector<bool> reached;
    std::vector<bool> missed;
  };

  Track& track(std::uint8_t sys_id);
  void close_mission(Track& tr);

  std::map<std::uint8_t, Track> tracks_;
  double t_end_ = 0.0;
};

RunMetrics metrics_from_records(const std::vector<LogRecord>& records);

}  // namespace jetyak
