#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jetyak/common/rng.hpp"
#include "jetyak/sensors/sample.hpp"
#include "jetyak/vehicle/vehicle.hpp"
#include "jetyak/world/environment.hpp"

namespace jetyak {

// Probability that a depth reading is corrupted by aerated water under the
// transducer: zero up to `onset_speed`, rising linearly to `max_rate` at v_max.
struct AerationModel {
  double onset_speed = 2.0;  // m/s
  double max_rate = 0.15;
  double v_max = 21.7 / 3.6;

  double rate(double v_water) const;
};

struct SensorConfig {
  double depth_noise_sd = 0.05;  // m
  double flow_noise_sd = 0.1;    // m/s, wind and current
  AerationModel aeration;
  bool depth_enabled = true;
  bool wind_enabled = true;
  bool current_enabled = true;
};

// Depth reading at the vehicle position. A corrupted reading is either
// Undefined (no value is reported as a negative depth) or an erratic high
// value of 2 to 10 times the true depth that is still marked Ok.
SensorSample sample_depth(const EnvironmentField& env, const VehicleState& state, const GeoPoint& origin,
                          Rng& rng, double noise_sd, const AerationModel& aeration,
                          std::uint8_t sys_id = 0);

// Field velocity relative to the moving boat in boat (forward, starboard) axes.
Vector2 measure_relative(const EnvironmentField& env, const VehicleState& state, SensorKind kind);

// Noisy wind or current sample with the ground velocity recorded alongside.
SensorSample sample_flow(const EnvironmentField& env, const VehicleState& state, const GeoPoint& origin,
                         Rng& rng, SensorKind kind, double noise_sd, std::uint8_t sys_id = 0);

// Moves a wind or current sample into the world frame using the heading and
// ground velocity recorded with it. Throws std::invalid_argument for depth
// samples or samples without a ground-velocity record.
Vector2 to_world(const SensorSample& sample);

struct OutlierFilterConfig {
  int window = 9;
  double threshold = 4.0;      // multiples of the scaled MAD
  double min_deviation = 0.1;  // m; deviations below the sonar resolution are never flagged
};

// Rolling median-absolute-deviation test on depth samples, grouped by
// sys_id in time order. Flagged samples become Suspect. Undefined samples
// never enter a window. Fewer than 3 usable samples pass through unchanged.
// Wind and current samples are passed through.
std::vector<SensorSample> filter_outliers(std::vector<SensorSample> samples,
                                          const OutlierFilterConfig& config = {});

// Nodes sit on the environment-grid lattice: node (row, col) is
// col * cell_size east and row * cell_size north of `origin`.
struct DepthGrid {
  GeoPoint origin;
  double cell_size = 5.0;
  Eigen::MatrixXd depth;   // NaN where unknown
  Eigen::MatrixXi counts;  // contributing samples; 0 for interpolated or empty cells

  Eigen::Index rows() const { return depth.rows(); }
  Eigen::Index cols() const { return depth.cols(); }
  bool empty() const { return depth.size() == 0; }
  LocalPoint node(Eigen::Index row, Eigen::Index col) const;
  EnvironmentGrid to_environment_grid() const;
};

struct GridConfig {
  double cell_size = 5.0;
  int idw_neighbors = 8;
  int idw_radius_cells = 5;
  double idw_power = 2.0;
};

// Per-cell mean of Ok depth samples, then inverse-distance fill of empty
// cells from nearby populated cells. `origin` anchors the local frame the
// samples are projected into.
DepthGrid grid_depth(const std::vector<SensorSample>& samples, const GeoPoint& origin,
                     const GridConfig& config = {});

// Newline-delimited JSON sample log; see docs/file-formats.md.
std::string sample_to_ndjson(const SensorSample& sample);
SensorSample sample_from_ndjson(const std::string& line);
void write_sample_log(std::ostream& out, const std::vector<SensorSample>& samples);
std::vector<SensorSample> read_sample_log(std::istream& in);

}  // namespace jetyak
