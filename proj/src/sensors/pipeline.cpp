#include "jetyak/sensors/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace jetyak {

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + n / 2);
  return 0.5 * (lo + hi);
}

constexpr double kMadToSigma = 1.4826;

// Croux and Rousseeuw small-sample consistency factors for the MAD.
double mad_small_sample_factor(std::size_t n) {
  static constexpr double kTable[] = {1.0, 1.0, 1.196, 1.495, 1.363, 1.206, 1.200, 1.140, 1.129, 1.107};
  if (n < 10) return kTable[n];
  return static_cast<double>(n) / (static_cast<double>(n) - 0.8);
}

}  // namespace

double AerationModel::rate(double v_water) const {
  if (v_water <= onset_speed) return 0.0;
  if (v_max <= onset_speed || v_water >= v_max) return max_rate;
  return max_rate * (v_water - onset_speed) / (v_max - onset_speed);
}

SensorSample sample_depth(const EnvironmentField& env, const VehicleState& state, const GeoPoint& origin,
                          Rng& rng, double noise_sd, const AerationModel& aeration, std::uint8_t sys_id) {
  SensorSample s;
  s.t = state.t;
  s.sys_id = sys_id;
  s.pos = local_to_geo(origin, state.pos);
  s.psi = state.psi.radians();
  s.kind = SensorKind::Depth;
  s.v_ground = state.v_ground;
  const double truth = env.depth_at(state.pos);
  // Fixed draw order keeps the stream aligned whether or not corruption occurs.
  const double noise = rng.gaussian(0.0, noise_sd);
  const double corrupt = rng.uniform();
  const double which = rng.uniform();
  const double factor = rng.uniform(2.0, 10.0);
  if (corrupt < aeration.rate(state.v_water)) {
    if (which < 0.5) {
      s.quality = SampleQuality::Undefined;
      s.values = {-1.0};
    } else {
      s.values = {truth * factor};
    }
  } else {
    s.values = {std::max(0.0, truth + noise)};
  }
  return s;
}

Vector2 measure_relative(const EnvironmentField& env, const VehicleState& state, SensorKind kind) {
  if (kind == SensorKind::Depth) throw std::invalid_argument("measure_relative: depth is not a flow field");
  const Vector2 field = kind == SensorKind::Wind ? env.wind_at(state.pos) : env.current_at(state.pos);
  return world_to_boat(field, state.psi.radians(), state.v_ground);
}

SensorSample sample_flow(const EnvironmentField& env, const VehicleState& state, const GeoPoint& origin,
                         Rng& rng, SensorKind kind, double noise_sd, std::uint8_t sys_id) {
  const Vector2 rel = measure_relative(env, state, kind);
  SensorSample s;
  s.t = state.t;
  s.sys_id = sys_id;
  s.pos = local_to_geo(origin, state.pos);
  s.psi = state.psi.radians();
  s.kind = kind;
  const double nx = rng.gaussian(0.0, noise_sd);
  const double ny = rng.gaussian(0.0, noise_sd);
  s.values = {rel.x() + nx, rel.y() + ny};
  s.v_ground = state.v_ground;
  return s;
}

Vector2 to_world(const SensorSample& sample) {
  if (sample.kind == SensorKind::Depth) throw std::invalid_argument("to_world: depth samples have no direction");
  if (!sample.v_ground) throw std::invalid_argument("to_world: sample has no ground-velocity record");
  if (sample.values.size() != 2) throw std::invalid_argument("to_world: expected two values");
  return boat_to_world(Vector2(sample.values[0], sample.values[1]), sample.psi, *sample.v_ground);
}

std::vector<SensorSample> filter_outliers(std::vector<SensorSample> samples, const OutlierFilterConfig& config) {
  if (config.window < 3 || !(config.threshold > 0.0) || !(config.min_deviation >= 0.0)) {
    throw std::invalid_argument("filter_outliers: window must be >= 3 and threshold > 0");
  }
  std::map<std::uint8_t, std::vector<std::size_t>> series;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const SensorSample& s = samples[k];
    if (s.kind == SensorKind::Depth && s.quality != SampleQuality::Undefined && !s.values.empty()) {
      series[s.sys_id].push_back(k);
    }
  }
  for (auto& [sys, idx] : series) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return samples[a].t < samples[b].t; });
    const std::size_t n = idx.size();
    if (n < 3) continue;
    const std::size_t w = std::min<std::size_t>(config.window, n);
    std::vector<bool> flag(n, false);
    std::vector<double> win;
    for (std::size_t i = 0; i < n; ++i) {
      // Centred window, shifted inward at the ends of the series.
      std::size_t lo = i >= w / 2 ? i - w / 2 : 0;
      lo = std::min(lo, n - w);
      win.clear();
      for (std::size_t j = lo; j < lo + w; ++j) win.push_back(samples[idx[j]].values[0]);
      const double med = median_of(win);
      for (double& x : win) x = std::abs(x - med);
      const double mad = kMadToSigma * mad_small_sample_factor(w) * median_of(win);
      flag[i] = std::abs(samples[idx[i]].values[0] - med) > std::max(config.threshold * mad, config.min_deviation);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (flag[i]) samples[idx[i]].quality = SampleQuality::Suspect;
    }
  }
  return samples;
}

LocalPoint DepthGrid::node(Eigen::Index row, Eigen::Index col) const {
  return LocalPoint(static_cast<double>(col) * cell_size, static_cast<double>(row) * cell_size);
}

EnvironmentGrid DepthGrid::to_environment_grid() const {
  EnvironmentGrid g = EnvironmentGrid::zeros(origin, cell_size, rows(), cols());
  g.depth = depth;
  return g;
}

DepthGrid grid_depth(const std::vector<SensorSample>& samples, const GeoPoint& origin, const GridConfig& config) {
  if (!(config.cell_size > 0.0) || config.idw_neighbors < 1 || config.idw_radius_cells < 0) {
    throw std::invalid_argument("grid_depth: invalid configuration");
  }
  DepthGrid grid;
  grid.cell_size = config.cell_size;
  grid.origin = origin;

  std::vector<std::pair<LocalPoint, double>> pts;
  for (const SensorSample& s : samples) {
    if (s.kind != SensorKind::Depth || s.quality != SampleQuality::Ok || s.values.empty()) continue;
    pts.emplace_back(geo_to_local(origin, s.pos), s.values[0]);
  }
  if (pts.empty()) return grid;

  const double cs = config.cell_size;
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = xmin;
  double xmax = -xmin;
  double ymax = -xmin;
  for (const auto& [p, d] : pts) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  const double x0 = std::floor(xmin / cs + 0.5) * cs;
  const double y0 = std::floor(ymin / cs + 0.5) * cs;
  const auto cols = static_cast<Eigen::Index>(std::floor((xmax - x0) / cs + 0.5)) + 1;
  const auto rows = static_cast<Eigen::Index>(std::floor((ymax - y0) / cs + 0.5)) + 1;
  grid.origin = local_to_geo(origin, LocalPoint(x0, y0));

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(rows, cols);
  grid.counts = Eigen::MatrixXi::Zero(rows, cols);
  for (const auto& [p, d] : pts) {
    const auto c = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor((p.x() - x0) / cs + 0.5)), 0, cols - 1);
    const auto r = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor((p.y() - y0) / cs + 0.5)), 0, rows - 1);
    sum(r, c) += d;
    grid.counts(r, c) += 1;
  }
  grid.depth = Eigen::MatrixXd::Constant(rows, cols, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (grid.counts(r, c) > 0) grid.depth(r, c) = sum(r, c) / grid.counts(r, c);
    }
  }

  const int rad = config.idw_radius_cells;
  const Eigen::MatrixXd measured = grid.depth;
  std::vector<std::pair<double, double>> near;  // (distance in cells, depth)
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (grid.counts(r, c) > 0) continue;
      near.clear();
      for (Eigen::Index rr = std::max<Eigen::Index>(0, r - rad); rr <= std::min(rows - 1, r + rad); ++rr) {
        for (Eigen::Index cc = std::max<Eigen::Index>(0, c - rad); cc <= std::min(cols - 1, c + rad); ++cc) {
          if (grid.counts(rr, cc) == 0) continue;
          const double dist = std::hypot(static_cast<double>(rr - r), static_cast<double>(cc - c));
          if (dist <= rad) near.emplace_back(dist, measured(rr, cc));
        }
      }
      if (near.empty()) continue;
      const std::size_t m = std::min<std::size_t>(config.idw_neighbors, near.size());
      std::partial_sort(near.begin(), near.begin() + m, near.end());
      double wsum = 0.0;
      double vsum = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double wgt = 1.0 / std::pow(near[k].first, config.idw_power);
        wsum += wgt;
        vsum += wgt * near[k].second;
      }
      grid.depth(r, c) = vsum / wsum;
    }
  }
  return grid;
}

std::string sample_to_ndjson(const SensorSample& s) {
  nlohmann::ordered_json j;
  j["t"] = s.t;
  j["sys_id"] = s.sys_id;
  j["lat"] = s.pos.lat;
  j["lon"] = s.pos.lon;
  j["psi"] = s.psi;
  j["kind"] = std::string(to_string(s.kind));
  j["values"] = s.values;
  j["quality"] = std::string(to_string(s.quality));
  if (s.v_ground) j["v_ground"] = {s.v_ground->x(), s.v_ground->y()};
  return j.dump();
}

SensorSample sample_from_ndjson(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  SensorSample s;
  try {
    s.t = j.at("t").get<double>();
    s.sys_id = j.at("sys_id").get<std::uint8_t>();
    s.pos = GeoPoint{j.at("lat").get<double>(), j.at("lon").get<double>()};
    s.psi = j.at("psi").get<double>();
    const auto kind = sensor_kind_from_string(j.at("kind").get<std::string>());
    const auto quality = quality_from_string(j.at("quality").get<std::string>());
    if (!kind || !quality) throw std::invalid_argument("unknown kind or quality");
    s.kind = *kind;
    s.quality = *quality;
    s.values = j.at("values").get<std::vector<double>>();
    if (j.contains("v_ground")) {
      const auto v = j["v_ground"].get<std::vector<double>>();
      if (v.size() != 2) throw std::invalid_argument("v_ground needs two values");
      s.v_ground = Vector2(v[0], v[1]);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("sample record: ") + e.what());
  }
  return s;
}

void write_sample_log(std::ostream& out, const std::vector<SensorSample>& samples) {
  for (const SensorSample& s : samples) out << sample_to_ndjson(s) << '\n';
}

std::vector<SensorSample> read_sample_log(std::istream& in) {
  std::vector<SensorSample> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(sample_from_ndjson(line));
    } catch (const std::exception& e) {
      throw std::invalid_argument("sample log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace jetyak
