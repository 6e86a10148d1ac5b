#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <variant>

#include <Eigen/Core>

#include "jetyak/world/frames.hpp"
#include "jetyak/world/geo.hpp"

namespace jetyak {

// Spatially uniform flow.
struct UniformFlow {
  Vector2 velocity = Vector2::Zero();
};

// Channel flow along `direction` with a parabolic profile across the channel:
// full speed on the centerline, zero at +/- half_width and beyond.
struct ShearChannel {
  LocalPoint centerline_point = LocalPoint::Zero();
  double direction = 0.0;  // heading of the flow, clockwise from north
  double max_speed = 0.0;
  double half_width = 50.0;
};

// Rankine vortex rotating counterclockwise (viewed from above) for positive
// peak_speed; solid-body inside core_radius, 1/r decay outside.
struct Vortex {
  LocalPoint center = LocalPoint::Zero();
  double peak_speed = 0.0;
  double core_radius = 20.0;
};

using FlowModel = std::variant<UniformFlow, ShearChannel, Vortex>;

struct FlatBottom {
  double depth = 5.0;
};

// depth = depth_at_origin + gradient . (p - origin), floored at zero.
struct RampBottom {
  LocalPoint origin = LocalPoint::Zero();
  double depth_at_origin = 5.0;
  Vector2 gradient = Vector2::Zero();
};

// Regular grid of environment layers. Node (row, col) sits at
// origin + (col * cell_size east, row * cell_size north); values between
// nodes are bilinear, values outside the grid clamp to the nearest edge.
// NaN marks an unknown value.
struct EnvironmentGrid {
  GeoPoint origin;
  double cell_size = 1.0;
  Eigen::MatrixXd depth;
  Eigen::MatrixXd current_east;
  Eigen::MatrixXd current_north;
  Eigen::MatrixXd wind_east;
  Eigen::MatrixXd wind_north;

  Eigen::Index rows() const { return depth.rows(); }
  Eigen::Index cols() const { return depth.cols(); }

  // Zero-filled grid of the given size.
  static EnvironmentGrid zeros(const GeoPoint& origin, double cell_size, Eigen::Index rows,
                               Eigen::Index cols);
};

// Text serialization; the format is described in docs/file-formats.md.
void write_environment_grid(std::ostream& out, const EnvironmentGrid& grid);
EnvironmentGrid read_environment_grid(std::istream& in);
void save_environment_grid(const std::filesystem::path& path, const EnvironmentGrid& grid);
EnvironmentGrid load_environment_grid(const std::filesystem::path& path);

// Bilinear sample of one layer at a grid-relative position (meters east/north
// of the grid origin). NaN neighbours are skipped; all-NaN gives NaN.
double sample_layer(const Eigen::MatrixXd& layer, double cell_size, const Vector2& offset);

// Environment seen by a vehicle: currents, winds and bathymetry in the
// scenario's local frame. Sampling is pure.
class EnvironmentField {
 public:
  EnvironmentField() = default;
  EnvironmentField(FlowModel current, FlowModel wind, std::variant<FlatBottom, RampBottom> bottom,
                   double max_current = 5.0);

  // Replaces all analytic layers with a grid. `scenario_origin` anchors the
  // local frame the field is queried in.
  static EnvironmentField from_grid(EnvironmentGrid grid, const GeoPoint& scenario_origin,
                                    double max_current = 5.0);

  Vector2 current_at(const LocalPoint& p) const;
  Vector2 wind_at(const LocalPoint& p) const;
  double depth_at(const LocalPoint& p) const;

  double max_current() const { return max_current_; }

 private:
  struct GridBinding {
    EnvironmentGrid grid;
    LocalPoint offset;  // local position of the grid origin
  };

  FlowModel current_ = UniformFlow{};
  FlowModel wind_ = UniformFlow{};
  std::variant<FlatBottom, RampBottom> bottom_ = FlatBottom{};
  std::optional<GridBinding> grid_;
  double max_current_ = 5.0;
};

Vector2 flow_at(const FlowModel& model, const LocalPoint& p);

}  // namespace jetyak
