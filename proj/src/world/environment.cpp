#include "jetyak/world/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "jetyak/world/angles.hpp"

namespace jetyak {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vector2 clamp_norm(const Vector2& v, double max_norm) {
  const double n = v.norm();
  if (n > max_norm && n > 0.0) return v * (max_norm / n);
  return v;
}

constexpr const char* kGridMagic = "jetyak-environment-grid";
constexpr const char* kLayerNames[] = {"depth", "current_east", "current_north", "wind_east",
                                       "wind_north"};

std::string next_token(std::istream& in, const char* what) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return tok;
  }
  throw std::runtime_error(std::string("environment grid: unexpected end of input reading ") + what);
}

double parse_double(const std::string& tok, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw std::runtime_error(std::string("environment grid: bad number '") + tok + "' in " + what);
  }
  return v;
}

void expect_keyword(std::istream& in, const std::string& kw) {
  const std::string tok = next_token(in, kw.c_str());
  if (tok != kw) {
    throw std::runtime_error("environment grid: expected '" + kw + "', found '" + tok + "'");
  }
}

}  // namespace

EnvironmentGrid EnvironmentGrid::zeros(const GeoPoint& origin, double cell_size, Eigen::Index rows,
                                       Eigen::Index cols) {
  EnvironmentGrid g;
  g.origin = origin;
  g.cell_size = cell_size;
  g.depth = Eigen::MatrixXd::Zero(rows, cols);
  g.current_east = g.depth;
  g.current_north = g.depth;
  g.wind_east = g.depth;
  g.wind_north = g.depth;
  return g;
}

void write_environment_grid(std::ostream& out, const EnvironmentGrid& grid) {
  out << kGridMagic << " 1\n";
  out << std::setprecision(17);
  out << "origin " << grid.origin.lat << ' ' << grid.origin.lon << '\n';
  out << "cell_size " << grid.cell_size << '\n';
  out << "rows " << grid.rows() << '\n';
  out << "cols " << grid.cols() << '\n';
  const Eigen::MatrixXd* layers[] = {&grid.depth, &grid.current_east, &grid.current_north,
                                     &grid.wind_east, &grid.wind_north};
  for (int k = 0; k < 5; ++k) {
    out << kLayerNames[k] << '\n';
    const Eigen::MatrixXd& m = *layers[k];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out << ' ';
        if (std::isnan(m(r, c))) {
          out << "nan";
        } else {
          out << m(r, c);
        }
      }
      out << '\n';
    }
  }
}

EnvironmentGrid read_environment_grid(std::istream& in) {
  if (next_token(in, "header") != kGridMagic) {
    throw std::runtime_error("environment grid: missing header");
  }
  if (next_token(in, "version") != "1") {
    throw std::runtime_error("environment grid: unsupported version");
  }
  EnvironmentGrid g;
  expect_keyword(in, "origin");
  const double lat = parse_double(next_token(in, "origin"), "origin");
  const double lon = parse_double(next_token(in, "origin"), "origin");
  g.origin = make_geo(lat, lon);
  expect_keyword(in, "cell_size");
  g.cell_size = parse_double(next_token(in, "cell_size"), "cell_size");
  if (!(g.cell_size > 0.0)) throw std::runtime_error("environment grid: cell_size must be > 0");
  expect_keyword(in, "rows");
  const double rows = parse_double(next_token(in, "rows"), "rows");
  expect_keyword(in, "cols");
  const double cols = parse_double(next_token(in, "cols"), "cols");
  if (rows < 1 || cols < 1 || rows != std::floor(rows) || cols != std::floor(cols)) {
    throw std::runtime_error("environment grid: rows/cols must be positive integers");
  }
  Eigen::MatrixXd* layers[] = {&g.depth, &g.current_east, &g.current_north, &g.wind_east,
                               &g.wind_north};
  for (int k = 0; k < 5; ++k) {
    expect_keyword(in, kLayerNames[k]);
    Eigen::MatrixXd& m = *layers[k];
    m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = parse_double(next_token(in, kLayerNames[k]), kLayerNames[k]);
      }
    }
  }
  return g;
}

void save_environment_grid(const std::filesystem::path& path, const EnvironmentGrid& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_environment_grid(out, grid);
}

EnvironmentGrid load_environment_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_environment_grid(in);
}

double sample_layer(const Eigen::MatrixXd& layer, double cell_size, const Vector2& offset) {
  const Eigen::Index rows = layer.rows();
  const Eigen::Index cols = layer.cols();
  const double fc = std::clamp(offset.x() / cell_size, 0.0, static_cast<double>(cols - 1));
  const double fr = std::clamp(offset.y() / cell_size, 0.0, static_cast<double>(rows - 1));
  const Eigen::Index c0 = static_cast<Eigen::Index>(std::floor(fc));
  const Eigen::Index r0 = static_cast<Eigen::Index>(std::floor(fr));
  const Eigen::Index c1 = std::min(c0 + 1, cols - 1);
  const Eigen::Index r1 = std::min(r0 + 1, rows - 1);
  const double tc = fc - static_cast<double>(c0);
  const double tr = fr - static_cast<double>(r0);

  const double w[4] = {(1 - tr) * (1 - tc), (1 - tr) * tc, tr * (1 - tc), tr * tc};
  const double v[4] = {layer(r0, c0), layer(r0, c1), layer(r1, c0), layer(r1, c1)};
  double sum = 0.0;
  double wsum = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (std::isnan(v[k])) continue;
    sum += w[k] * v[k];
    wsum += w[k];
  }
  if (wsum <= 0.0) {
    // Only NaN-weighted corners carry weight; fall back to any known corner.
    for (int k = 0; k < 4; ++k) {
      if (!std::isnan(v[k])) return v[k];
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
  return sum / wsum;
}

Vector2 flow_at(const FlowModel& model, const LocalPoint& p) {
  return std::visit(
      Overloaded{
          [](const UniformFlow& f) -> Vector2 { return f.velocity; },
          [&p](const ShearChannel& f) -> Vector2 {
            const Vector2 along = heading_vector(f.direction);
            const Vector2 across(along.y(), -along.x());
            const double d = across.dot(p - f.centerline_point);
            const double s = d / f.half_width;
            const double speed = std::abs(s) >= 1.0 ? 0.0 : f.max_speed * (1.0 - s * s);
            return along * speed;
          },
          [&p](const Vortex& f) -> Vector2 {
            const Vector2 r = p - f.center;
            const double dist = r.norm();
            if (dist == 0.0) return Vector2::Zero();
            const double speed = dist <= f.core_radius ? f.peak_speed * dist / f.core_radius
                                                       : f.peak_speed * f.core_radius / dist;
            // Counterclockwise tangent in (east, north).
            return Vector2(-r.y(), r.x()) / dist * speed;
          },
      },
      model);
}

EnvironmentField::EnvironmentField(FlowModel current, FlowModel wind,
                                   std::variant<FlatBottom, RampBottom> bottom, double max_current)
    : current_(std::move(current)),
      wind_(std::move(wind)),
      bottom_(std::move(bottom)),
      max_current_(max_current) {
  if (!(max_current >= 0.0)) throw std::invalid_argument("max_current must be >= 0");
}

EnvironmentField EnvironmentField::from_grid(EnvironmentGrid grid, const GeoPoint& scenario_origin,
                                             double max_current) {
  EnvironmentField f;
  f.max_current_ = max_current;
  const LocalPoint offset = geo_to_local(scenario_origin, grid.origin);
  f.grid_ = GridBinding{std::move(grid), offset};
  return f;
}

Vector2 EnvironmentField::current_at(const LocalPoint& p) const {
  Vector2 v;
  if (grid_) {
    const Vector2 q = p - grid_->offset;
    v = Vector2(sample_layer(grid_->grid.current_east, grid_->grid.cell_size, q),
                sample_layer(grid_->grid.current_north, grid_->grid.cell_size, q));
    if (!v.allFinite()) v.setZero();
  } else {
    v = flow_at(current_, p);
  }
  return clamp_norm(v, max_current_);
}

Vector2 EnvironmentField::wind_at(const LocalPoint& p) const {
  if (grid_) {
    const Vector2 q = p - grid_->offset;
    Vector2 v(sample_layer(grid_->grid.wind_east, grid_->grid.cell_size, q),
              sample_layer(grid_->grid.wind_north, grid_->grid.cell_size, q));
    if (!v.allFinite()) v.setZero();
    return v;
  }
  return flow_at(wind_, p);
}

double EnvironmentField::depth_at(const LocalPoint& p) const {
  double d = 0.0;
  if (grid_) {
    d = sample_layer(grid_->grid.depth, grid_->grid.cell_size, p - grid_->offset);
    if (std::isnan(d)) d = 0.0;
  } else {
    d = std::visit(Overloaded{
                       [](const FlatBottom& b) { return b.depth; },
                       [&p](const RampBottom& b) {
                         return b.depth_at_origin + b.gradient.dot(p - b.origin);
                       },
                   },
                   bottom_);
  }
  return std::max(d, 0.0);
}

}  // namespace jetyak
