#include <cmath>
#include <sstream>

#include "depth_survey.hpp"
#include "doctest.h"

#include "jetyak/sensors/pipeline.hpp"

using namespace jetyak;

namespace {

const GeoPoint kOrigin{42.36, -71.09};

EnvironmentField ramp_env() {
  RampBottom ramp;
  ramp.depth_at_origin = 4.0;
  ramp.gradient = Vector2(0.03, 0.01);
  return EnvironmentField(UniformFlow{Vector2(0.4, -0.2)}, UniformFlow{Vector2(3.0, 1.0)}, ramp);
}

}  // namespace

TEST_SUITE("sensors") {

TEST_CASE("aeration rate ramps from onset to v_max") {
  AerationModel a;
  a.onset_speed = 2.0;
  a.max_rate = 0.2;
  a.v_max = 6.0;
  CHECK(a.rate(0.0) == 0.0);
  CHECK(a.rate(2.0) == 0.0);
  CHECK(a.rate(4.0) == doctest::Approx(0.1));
  CHECK(a.rate(6.0) == doctest::Approx(0.2));
  CHECK(a.rate(9.0) == doctest::Approx(0.2));
}

TEST_CASE("relative flow measurement against scalar trigonometry") {
  const EnvironmentField env = ramp_env();
  Rng rng(15);
  for (int k = 0; k < 1000; ++k) {
    VehicleState st;
    st.pos = LocalPoint(rng.uniform(-50, 50), rng.uniform(-50, 50));
    st.psi = Heading(rng.uniform(0, 2 * M_PI));
    st.v_ground = Vector2(rng.uniform(-4, 4), rng.uniform(-4, 4));
    const double psi = st.psi.radians();
    const Vector2 rel_world = env.current_at(st.pos) - st.v_ground;
    // Project onto the bow (heading) and starboard (heading + 90 degrees) axes.
    const double fwd = rel_world.x() * std::sin(psi) + rel_world.y() * std::cos(psi);
    const double stbd = rel_world.x() * std::cos(psi) - rel_world.y() * std::sin(psi);
    const Vector2 m = measure_relative(env, st, SensorKind::Current);
    CHECK(std::abs(m.x() - fwd) < 1e-9);
    CHECK(std::abs(m.y() - stbd) < 1e-9);

    const SensorSample s = sample_flow(env, st, kOrigin, rng, SensorKind::Wind, 0.0, 2);
    CHECK((to_world(s) - env.wind_at(st.pos)).norm() < 1e-9);
  }
  SensorSample depth;
  CHECK_THROWS_AS(to_world(depth), std::invalid_argument);
  SensorSample no_vg;
  no_vg.kind = SensorKind::Current;
  no_vg.values = {1.0, 0.0};
  CHECK_THROWS_AS(to_world(no_vg), std::invalid_argument);
}

TEST_CASE("depth noise is unbiased with the configured spread") {
  const EnvironmentField env(UniformFlow{}, UniformFlow{}, FlatBottom{6.0});
  Rng rng(16);
  VehicleState st;
  st.v_water = 1.0;  // below the aeration onset
  double sum = 0.0, sum_sq = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const SensorSample s = sample_depth(env, st, kOrigin, rng, 0.05, AerationModel{}, 1);
    REQUIRE(s.quality == SampleQuality::Ok);
    sum += s.values[0];
    sum_sq += s.values[0] * s.values[0];
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum_sq / n - mean * mean);
  CHECK(mean == doctest::Approx(6.0).epsilon(1e-3));
  CHECK(sd == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("aerated readings are undefined or erratically high") {
  const EnvironmentField env(UniformFlow{}, UniformFlow{}, FlatBottom{5.0});
  Rng rng(17);
  AerationModel always;
  always.onset_speed = 0.0;
  always.max_rate = 1.0;
  always.v_max = 1.0;
  VehicleState st;
  st.v_water = 1.0;
  int undefined = 0;
  const int n = 4000;
  for (int k = 0; k < n; ++k) {
    const SensorSample s = sample_depth(env, st, kOrigin, rng, 0.05, always, 1);
    if (s.quality == SampleQuality::Undefined) {
      ++undefined;
      CHECK(s.values[0] == -1.0);
    } else {
      CHECK(s.values[0] >= 10.0);
      CHECK(s.values[0] <= 50.0);
    }
  }
  CHECK(double(undefined) / n == doctest::Approx(0.5).epsilon(0.08));
}

TEST_CASE("outlier filter flags erratic depths and spares clean ones") {
  const EnvironmentField env = ramp_env();
  SensorConfig cfg;
  Rng rng(18);
  const auto survey = testing::depth_survey(env, kOrigin, rng, 200, 200, 10, 5.0, 5.0, cfg);
  const auto filtered = filter_outliers(survey.samples);
  REQUIRE(filtered.size() == survey.samples.size());
  std::size_t erratic = 0, caught = 0, clean = 0, false_pos = 0;
  for (std::size_t k = 0; k < filtered.size(); ++k) {
    if (survey.samples[k].quality == SampleQuality::Undefined) {
      CHECK(filtered[k].quality == SampleQuality::Undefined);
      continue;
    }
    const bool flagged = filtered[k].quality == SampleQuality::Suspect;
    if (survey.erratic[k]) {
      ++erratic;
      caught += flagged;
    } else {
      ++clean;
      false_pos += flagged;
    }
  }
  REQUIRE(erratic > 50);
  CHECK(double(caught) / erratic >= 0.95);
  CHECK(double(false_pos) / clean <= 0.01);
}

TEST_CASE("outlier filter leaves flow samples and short series alone") {
  std::vector<SensorSample> s(2);
  s[0].values = {3.0};
  s[1].values = {300.0};
  const auto out = filter_outliers(s);
  CHECK(out[1].quality == SampleQuality::Ok);

  std::vector<SensorSample> flows(20);
  for (std::size_t k = 0; k < flows.size(); ++k) {
    flows[k].kind = SensorKind::Wind;
    flows[k].t = double(k);
    flows[k].values = {k == 10 ? 100.0 : 1.0, 0.0};
  }
  for (const SensorSample& f : filter_outliers(flows)) CHECK(f.quality == SampleQuality::Ok);
}

TEST_CASE("ramp bathymetry grid error is within twice the sensor noise") {
  const EnvironmentField env = ramp_env();
  SensorConfig cfg;
  cfg.aeration.max_rate = 0.0;
  Rng rng(19);
  const auto survey = testing::depth_survey(env, kOrigin, rng, 100, 100, 5, 2.0, 5.0, cfg);
  GridConfig gc;
  gc.cell_size = 5.0;
  const DepthGrid grid = grid_depth(survey.samples, kOrigin, gc);
  REQUIRE_FALSE(grid.empty());
  double sq = 0.0;
  int n = 0;
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      if (std::isnan(grid.depth(r, c))) continue;
      const double e = grid.depth(r, c) - env.depth_at(grid.node(r, c));
      sq += e * e;
      ++n;
    }
  }
  REQUIRE(n > 100);
  CHECK(std::sqrt(sq / n) <= 2.0 * cfg.depth_noise_sd);
  CHECK(grid.counts.sum() == static_cast<int>(survey.samples.size()));
}

TEST_CASE("grid skips non-Ok samples and fills gaps only near data") {
  std::vector<SensorSample> s;
  auto add = [&](double east, double north, double depth, SampleQuality q) {
    SensorSample x;
    x.pos = local_to_geo(kOrigin, LocalPoint(east, north));
    x.values = {depth};
    x.quality = q;
    s.push_back(x);
  };
  add(0, 0, 2.0, SampleQuality::Ok);
  add(10, 0, 4.0, SampleQuality::Ok);
  add(5, 0, 99.0, SampleQuality::Suspect);
  add(5, 0, -1.0, SampleQuality::Undefined);
  add(100, 0, 8.0, SampleQuality::Ok);
  const DepthGrid g = grid_depth(s, kOrigin, GridConfig{});
  CHECK(g.counts.sum() == 3);
  // The cell between two samples is interpolated from its neighbours.
  bool found_mid = false;
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    const LocalPoint p = g.node(0, c);
    if (std::abs(p.x() - 5.0) < 1e-6 && std::abs(p.y()) < 1e-6) {
      found_mid = true;
      CHECK(g.depth(0, c) == doctest::Approx(3.0));
      CHECK(g.counts(0, c) == 0);
    }
    if (p.x() > 40.0 && p.x() < 70.0) CHECK(std::isnan(g.depth(0, c)));
  }
  CHECK(found_mid);
  CHECK(grid_depth({}, kOrigin).empty());
}

TEST_CASE("sample log NDJSON round trip") {
  const EnvironmentField env = ramp_env();
  Rng rng(20);
  std::vector<SensorSample> samples;
  VehicleState st;
  st.v_water = 5.5;
  st.v_ground = Vector2(0.1, 5.0);
  for (int k = 0; k < 200; ++k) {
    st.t = 0.2 * k;
    st.pos = LocalPoint(k * 0.5, k * 1.0);
    samples.push_back(sample_depth(env, st, kOrigin, rng, 0.05, AerationModel{}, 3));
    samples.push_back(sample_flow(env, st, kOrigin, rng, SensorKind::Current, 0.1, 3));
  }
  std::stringstream ss;
  write_sample_log(ss, samples);
  CHECK(read_sample_log(ss) == samples);

  std::stringstream bad(sample_to_ndjson(samples[0]) + "\n{\"t\": 1}\n");
  try {
    read_sample_log(bad);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

}  // TEST_SUITE
