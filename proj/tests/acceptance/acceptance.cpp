// Acceptance suite: one PASS/FAIL line per criterion with its measured values.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "depth_survey.hpp"
#include "dubins_oracle.hpp"
#include "random_messages.hpp"

#include "jetyak/autopilot/autopilot.hpp"
#include "jetyak/autopilot/tuner.hpp"
#include "jetyak/coverage/dubins.hpp"
#include "jetyak/coverage/planner.hpp"
#include "jetyak/coverage/polygon.hpp"
#include "jetyak/gcs/session.hpp"
#include "jetyak/link/codec.hpp"
#include "jetyak/link/link_model.hpp"
#include "jetyak/link/mission_transfer.hpp"
#include "jetyak/sensors/pipeline.hpp"
#include "jetyak/sim/event_log.hpp"
#include "jetyak/sim/metrics.hpp"
#include "jetyak/sim/scenario.hpp"
#include "jetyak/vehicle/vehicle.hpp"

using namespace jetyak;

namespace {

const std::filesystem::path kScenarios = JETYAK_SCENARIO_DIR;

struct Verdict {
  bool pass = true;
  std::string detail;

  // Records one measured check; all must hold for the criterion to pass.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel_err(double measured, double target) { return std::abs(measured - target) / std::abs(target); }

PwmSignal pwm(double fraction) { return normalized_to_pwm(fraction, ServoCalibration{}); }

Scenario load_planned(const char* name) {
  Scenario s = load_scenario(kScenarios / name);
  assign_survey_missions(s);
  return s;
}

// Runs to completion; returns metrics and, when `log` is given, the raw log.
RunMetrics run_scenario(Scenario s, std::string* log = nullptr,
                        const std::function<void(Session&)>& setup = {}) {
  std::ostringstream out;
  Session session(std::move(s), log ? &out : nullptr);
  if (setup) setup(session);
  session.run();
  session.finish();
  if (log) *log = out.str();
  return session.metrics();
}

// Least-squares circle through points: x^2 + y^2 = 2ax + 2by + c.
double fit_circle_radius(const std::vector<LocalPoint>& pts) {
  Eigen::MatrixX3d a(pts.size(), 3);
  Eigen::VectorXd b(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    a.row(k) << 2.0 * pts[k].x(), 2.0 * pts[k].y(), 1.0;
    b(k) = pts[k].squaredNorm();
  }
  const Eigen::Vector3d sol = a.colPivHouseholderQr().solve(b);
  return std::sqrt(sol(2) + sol.head<2>().squaredNorm());
}

// Channel-5 band table written out by hand.
Mode band_oracle(double us) {
  if (us < 1230.0) return Mode::ManualRc;
  if (us < 1360.0) return Mode::AutoWpOffboard;
  if (us < 1490.0) return Mode::AutoWpOnboard;
  if (us < 1620.0) return Mode::VelocityControl;
  if (us < 1750.0) return Mode::ManualRc;
  return Mode::AutoWpOnboard;
}

Verdict a1_envelope() {
  Verdict v;
  const VehicleParams p;
  const EnvironmentField calm;
  const double dt = 0.05;

  VehicleState s = initial_state(p, LocalPoint::Zero(), Heading(0.0));
  for (int k = 0; k < 1200; ++k) s = step(s, p, pwm(0.0), pwm(1.0), calm, dt);
  const LocalPoint before = s.pos;
  for (int k = 0; k < 200; ++k) s = step(s, p, pwm(0.0), pwm(1.0), calm, dt);
  const double kmh = (s.pos - before).norm() / 10.0 * 3.6;
  v.check(rel_err(kmh, 21.7) <= 0.005, fmt("speed %.3f km/h (21.7 +-0.5%%)", kmh));

  s = initial_state(p, LocalPoint::Zero(), Heading(0.0));
  s.v_water = p.v_max;
  for (int k = 0; k < 100; ++k) s = step(s, p, pwm(1.0), pwm(1.0), calm, dt);
  std::vector<LocalPoint> circle;
  for (int k = 0; k < 200; ++k) {
    s = step(s, p, pwm(1.0), pwm(1.0), calm, dt);
    circle.push_back(s.pos);
  }
  const double r = fit_circle_radius(circle);
  v.check(rel_err(r, 5.0) <= 0.02, fmt("turn radius %.3f m (5.0 +-2%%)", r));

  for (const auto& [u, hours] : {std::pair{1.0, 4.0}, {0.0, 18.0}}) {
    const double fdt = 0.1;
    VehicleState f = initial_state(p, LocalPoint(0, 0), Heading(0.0));
    std::uint64_t ticks = 0;
    while (f.engine == EngineStatus::Running && ticks < 2'000'000) {
      f = step(f, p, pwm(0.0), pwm(u), calm, fdt);
      ++ticks;
    }
    const double h = double(ticks) * fdt / 3600.0;
    v.check(f.engine == EngineStatus::FuelExhausted && rel_err(h, hours) <= 0.01,
            fmt("fuel out at %.3f h with throttle %.0f (%.1f +-1%%)", h, u, hours));
  }
  return v;
}

Verdict a2_kill() {
  Verdict v;
  const Scenario bench = load_planned("bench.json");
  const ModeTable& table = bench.autopilot.modes;

  // Every safety combination x requested mode x ch6 state, through the full
  // simulated vehicle.
  int combos = 0, mismatches = 0;
  std::vector<bool> seen(5, false);
  for (unsigned bits = 0; bits < 16; ++bits) {
    for (Mode requested : kAllModes) {
      for (double ch6 : {1000.0, 1900.0}) {
        SafetyInputs safety;
        safety.hw_manual_switch = (bits & 1u) || requested == Mode::ManualOnboard;
        safety.kill_override = bits & 2u;
        safety.autopilot_powered = bits & 4u;
        safety.kill_line_high = bits & 8u;
        RcFrame rc;
        rc.ch5_us = requested == Mode::ManualOnboard ? table.pulse_for(Mode::ManualRc) : table.pulse_for(requested);
        rc.ch6_us = ch6;

        Simulation sim(bench);
        VehicleNode& node = sim.node(1);
        node.safety() = safety;
        node.rc() = rc;
        for (int k = 0; k < 3; ++k) sim.step();
        const bool expect_killed = evaluate_kill(safety, rc, table) == EngineCommand::Killed;
        const bool killed = node.state().engine == EngineStatus::Killed;
        ++combos;
        mismatches += killed != expect_killed;
        seen[static_cast<std::size_t>(node.autopilot().mode())] = true;
      }
    }
  }
  const bool all_modes = std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  v.check(mismatches == 0 && all_modes,
          fmt("%d/%d safety x mode x ch6 combinations match the truth table, %s", combos - mismatches, combos,
              all_modes ? "all 5 modes exercised" : "not every mode reached"));

  {
    Simulation sim(bench);
    for (int k = 0; k < 20; ++k) sim.step();
    sim.node(1).safety().autopilot_powered = false;
    sim.step();
    v.check(sim.node(1).state().engine == EngineStatus::Killed, "autopilot power loss kills within 1 tick");
  }
  {
    Simulation sim(bench);
    sim.node(1).safety().kill_override = true;
    sim.node(1).safety().autopilot_powered = false;
    sim.node(1).rc().ch6_us = 1000.0;
    for (int k = 0; k < 20; ++k) sim.step();
    Session session(bench);
    session.sim().node(1).safety().kill_override = true;
    session.run_until([&] { return session.gcs().link_state(1) == LinkState::Connected; }, 3.0);
    session.command(1, KillMsg{});
    session.run_until([] { return false; }, 2.0);
    v.check(sim.node(1).state().engine == EngineStatus::Running &&
                session.sim().node(1).state().engine == EngineStatus::Running,
            "override keeps the engine running through power loss, ch6 kill and GCS kill");
  }

  // End-to-end GCS kill on every fleet vehicle: link path latches the kill.
  const Scenario fleet = load_planned("fleet4.json");
  const double bound = fleet.link.latency + 1.0 + fleet.dt;
  double worst = 0.0;
  bool all_latched = true;
  for (const VehicleSpec& spec : fleet.vehicles) {
    Session session(fleet);
    session.run_until([] { return false; }, 10.0);
    const double t0 = session.now();
    session.command(spec.sys_id, KillMsg{});
    VehicleNode& node = session.sim().node(spec.sys_id);
    const bool latched = session.run_until(
        [&] { return node.autopilot().remote_kill_latched() && node.state().engine == EngineStatus::Killed; }, 5.0);
    all_latched = all_latched && latched;
    worst = std::max(worst, session.now() - t0);
  }
  v.check(all_latched && worst <= bound + 1e-9,
          fmt("GCS kill latency %.3f s worst over 4 vehicles (<= %.3f s)", worst, bound));
  return v;
}

Verdict a3_modes() {
  Verdict v;
  const AutopilotConfig config;
  int samples = 0, mismatches = 0;
  for (int us = 900; us <= 2100; ++us) {
    for (bool hw : {false, true}) {
      TickInputs in;
      in.rc.ch5_us = us;
      in.safety.hw_manual_switch = hw;
      Autopilot ap(config, VehicleParams{}, GeoPoint{42.36, -71.09});
      const Mode got = ap.control_tick(in, initial_state(VehicleParams{}, LocalPoint::Zero(), Heading(0.0)), 0.05).mode;
      const Mode expected = hw ? Mode::ManualOnboard : band_oracle(us);
      ++samples;
      mismatches += got != expected || resolve_mode(in.safety, in.rc, config.modes) != expected;
    }
  }
  v.check(mismatches == 0, fmt("%d/%d ch5 x hw-switch samples match the six-band table", samples - mismatches, samples));
  return v;
}

Verdict a4_calm() {
  Verdict v;
  Scenario s = load_planned("calm_lawnmower.json");
  TuneConfig tc;
  tc.dt = s.dt;
  tc.guidance = s.autopilot.guidance;
  const TuneResult tuned = auto_tune(s.params, s.autopilot.gains, tc);
  v.check(tuned.converged, fmt("auto-tune converged after %d iterations", tuned.iterations));
  s.autopilot.gains = tuned.gains;
  const RunMetrics m = run_scenario(s);
  const VehicleMetrics& vm = m.vehicles.at(0);
  v.check(vm.waypoints_hit == vm.waypoints_total && vm.waypoints_total > 0,
          fmt("%zu/%zu waypoints accepted", vm.waypoints_hit, vm.waypoints_total));
  v.check(vm.xtrack_rms() <= 1.0, fmt("cross-track RMS %.3f m (<= 1.0)", vm.xtrack_rms()));
  return v;
}

Verdict a5_current() {
  Verdict v;
  const Scenario s = load_planned("cross_current.json");
  const RunMetrics m = run_scenario(s);
  const VehicleMetrics& vm = m.vehicles.at(0);
  v.check(vm.waypoints_hit == vm.waypoints_total && vm.waypoints_total > 0,
          fmt("%zu/%zu waypoints eventually accepted", vm.waypoints_hit, vm.waypoints_total));
  v.check(vm.missed_first_pass >= 1, fmt("%zu missed on first pass (>= 1)", vm.missed_first_pass));
  return v;
}

Mission numbered_mission(std::size_t n, std::uint16_t id) {
  Mission m;
  m.id = id;
  m.home = GeoPoint{42.36, -71.09};
  for (std::size_t k = 0; k < n; ++k) {
    m.waypoints.push_back({GeoPoint{42.36 + 1e-4 * double(k), -71.09 + 2e-4 * double(k % 3)}, 2.0 + 0.1 * double(k)});
  }
  return m;
}

Verdict a6_protocol() {
  Verdict v;
  Rng rng(61);
  int bad_round_trips = 0;
  const int n = 100'000;
  for (int k = 0; k < n; ++k) {
    const Frame f{static_cast<std::uint8_t>(k), static_cast<std::uint8_t>(rng.next_u64()), testing::random_message(rng)};
    const DecodeResult r = decode(encode(f));
    bad_round_trips += !(std::holds_alternative<Frame>(r) && std::get<Frame>(r) == f);
  }
  v.check(bad_round_trips == 0, fmt("%d/%d random messages round-trip bit-exact", n - bad_round_trips, n));

  std::size_t flips = 0, silent = 0;
  for (int k = 0; k < 10; ++k) {
    Message msg;
    do msg = testing::random_message(rng);
    while (msg.index() != static_cast<std::size_t>(k));
    const std::vector<std::uint8_t> frame = encode(msg, 3, 1);
    for (std::size_t bit = 0; bit < frame.size() * 8; ++bit) {
      std::vector<std::uint8_t> bad = frame;
      bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      ++flips;
      silent += std::holds_alternative<Frame>(decode(bad));
    }
  }
  v.check(silent == 0, fmt("%zu single-bit flips over all message types, %zu undetected", flips, silent));

  StreamDecoder dec;
  std::size_t fuzz = 0, spurious = 0;
  while (fuzz < 1'000'000) {
    std::vector<std::uint8_t> junk(4096);
    for (auto& b : junk) b = static_cast<std::uint8_t>(rng.next_u64() % 4 == 0 ? 0xA5 : rng.next_u64());
    dec.feed(junk);
    while (dec.next()) ++spurious;
    decode(junk);
    fuzz += junk.size();
  }
  v.check(dec.buffered() < 300, fmt("decoder survived %zu fuzz bytes (%zu chance frames)", fuzz, spurious));

  LinkModel lossy;
  lossy.base_loss = 0.2;
  int converged = 0;
  const int uploads = 20;
  for (int seed = 1; seed <= uploads; ++seed) {
    Rng link_rng(static_cast<std::uint64_t>(seed));
    const Mission mission = numbered_mission(40, static_cast<std::uint16_t>(seed));
    MissionReceiver rx;
    std::optional<Mission> onboard;
    const UploadReport r = simulate_upload(mission, lossy, link_rng, rx, onboard);
    converged += r.ack.status == MissionStatus::Accepted && onboard && *onboard == mission;
  }
  v.check(converged == uploads, fmt("%d/%d uploads under 20%% loss converged with identical onboard missions",
                                    converged, uploads));
  return v;
}

Verdict a7_link() {
  Verdict v;
  LinkModel model;
  const int n = 10'000;
  LinkChannel near(model, Rng(71));
  int delivered_near = 0;
  for (int k = 0; k < n; ++k) delivered_near += near.send({1}, 0.0, 2790.0);
  v.check(delivered_near == n, fmt("%d/%d frames delivered at 2790 m", delivered_near, n));
  LinkChannel far(model, Rng(72));
  int delivered_far = 0;
  for (double d : {2800.001, 2850.0, 5000.0}) {
    for (int k = 0; k < n; ++k) delivered_far += far.send({1}, 0.0, d);
  }
  v.check(delivered_far == 0, fmt("%d frames delivered beyond 2800 m", delivered_far));

  Session session(load_planned("calm_lawnmower.json"));
  session.sim().set_link_severed(1, true);
  session.run();
  session.finish();
  const RunMetrics m = session.metrics();
  const std::size_t shore_frames = session.gcs().fleet().find(1)->frames;
  const VehicleMetrics& vm = m.vehicles.at(0);
  v.check(vm.mission_complete && vm.waypoints_hit == vm.waypoints_total && shore_frames == 0,
          fmt("onboard mission %zu/%zu waypoints with the link severed, %zu frames reached shore", vm.waypoints_hit,
              vm.waypoints_total, shore_frames));
  return v;
}

Polygon regular_polygon(int n, double radius, double rotation) {
  Polygon p;
  for (int k = 0; k < n; ++k) {
    const double a = rotation + 2 * M_PI * k / n;
    p.push_back(radius * LocalPoint(std::cos(a), std::sin(a)));
  }
  return normalized_polygon(p);
}

Verdict a8_coverage() {
  Verdict v;
  Rng rng(81);
  double worst_cov = 1.0, worst_radius = INFINITY, worst_split = 0.0;
  for (int trial = 0; trial < 24; ++trial) {
    SurveyArea a;
    if (trial % 4 == 3) {
      const double w = rng.uniform(60, 200), h = rng.uniform(60, 200);
      a.boundary = {LocalPoint(0, 0), LocalPoint(w, 0), LocalPoint(w, h), LocalPoint(0, h)};
    } else {
      a.boundary = regular_polygon(3 + trial % 6, rng.uniform(60, 150), rng.uniform(0, 2));
    }
    a.swath = rng.uniform(8, 20);
    a.transect_heading = rng.uniform(0, M_PI);
    const int k = 1 + trial % 3;
    std::vector<LocalPoint> entries;
    for (int e = 0; e < k; ++e) entries.push_back(LocalPoint(-200.0 + 30.0 * e, -200.0));
    const CoveragePlan plan = jetyak::plan(a, k, 5.0, entries);
    std::vector<std::vector<LocalPoint>> tracks;
    for (const VehiclePlan& vp : plan.vehicles) {
      tracks.push_back(vp.points());
      worst_radius = std::min(worst_radius, min_turn_radius(vp.points()));
    }
    worst_cov = std::min(worst_cov, coverage_ratio(a.boundary, tracks, a.swath, a.swath / 8));

    const PartitionResult parts = partition(a, 3);
    const double target = area(a.boundary) / 3.0;
    for (const Polygon& p : parts.parts) worst_split = std::max(worst_split, rel_err(area(p), target));
    if (parts.parts.size() != 3) worst_split = INFINITY;
  }
  v.check(worst_cov >= 0.99, fmt("worst rasterized coverage %.4f over 24 convex polygons (>= 0.99)", worst_cov));
  v.check(1.0 / worst_radius <= 1.0 / 5.0 + 1e-9,
          fmt("max track curvature %.5f 1/m (<= 0.2)", 1.0 / worst_radius));
  v.check(worst_split <= 0.01, fmt("k=3 partition area error %.2e (<= 1%%)", worst_split));

  double worst_dubins = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Pose p{LocalPoint(rng.uniform(-50, 50), rng.uniform(-50, 50)), rng.uniform(0, 2 * M_PI)};
    const Pose q{LocalPoint(rng.uniform(-50, 50), rng.uniform(-50, 50)), rng.uniform(0, 2 * M_PI)};
    const double r = rng.uniform(1.0, 10.0);
    worst_dubins = std::max(worst_dubins, std::abs(dubins_connect(p, q, r).length() - testing::dubins_oracle(p, q, r)));
  }
  v.check(worst_dubins <= 1e-6, fmt("Dubins length error %.2e over 1000 pose pairs (<= 1e-6)", worst_dubins));
  return v;
}

Verdict a9_sensing() {
  Verdict v;
  Rng rng(91);
  RampBottom ramp;
  ramp.depth_at_origin = 4.0;
  ramp.gradient = Vector2(0.03, 0.01);
  const EnvironmentField env(UniformFlow{Vector2(0.6, -0.3)}, UniformFlow{Vector2(3.0, 1.5)}, ramp);
  const GeoPoint origin{42.36, -71.09};

  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double psi = rng.uniform(0, 2 * M_PI);
    const Vector2 vg(rng.uniform(-6, 6), rng.uniform(-6, 6));
    const Vector2 rel(rng.uniform(-10, 10), rng.uniform(-10, 10));
    // Forward axis (sin psi, cos psi), starboard axis (cos psi, -sin psi).
    const double we = vg.x() + rel.x() * std::sin(psi) + rel.y() * std::cos(psi);
    const double wn = vg.y() + rel.x() * std::cos(psi) - rel.y() * std::sin(psi);
    const Vector2 world = boat_to_world(rel, psi, vg);
    worst = std::max({worst, std::abs(world.x() - we), std::abs(world.y() - wn)});
    worst = std::max(worst, (world_to_boat(world, psi, vg) - rel).cwiseAbs().maxCoeff());
  }
  v.check(worst <= 1e-9, fmt("boat/world transform error %.2e over 1000 states (<= 1e-9)", worst));

  SensorConfig cfg;
  const auto survey = testing::depth_survey(env, origin, rng, 300, 300, 10, 5.0, 5.0, cfg);
  const auto filtered = filter_outliers(survey.samples);
  std::size_t erratic = 0, caught = 0, clean = 0, false_pos = 0;
  for (std::size_t k = 0; k < filtered.size(); ++k) {
    if (survey.samples[k].quality == SampleQuality::Undefined) continue;
    const bool flagged = filtered[k].quality == SampleQuality::Suspect;
    if (survey.erratic[k]) {
      ++erratic;
      caught += flagged;
    } else {
      ++clean;
      false_pos += flagged;
    }
  }
  const double catch_rate = double(caught) / double(erratic);
  const double fp_rate = double(false_pos) / double(clean);
  v.check(erratic > 0 && catch_rate >= 0.95,
          fmt("caught %zu/%zu injected erratic depths = %.3f (>= 0.95)", caught, erratic, catch_rate));
  v.check(fp_rate <= 0.01, fmt("false positives %zu/%zu = %.4f (<= 0.01)", false_pos, clean, fp_rate));

  // Survey at a moderate speed with aeration active; the grid uses filtered samples.
  const auto grid_survey = testing::depth_survey(env, origin, rng, 150, 150, 5, 3.0, 5.0, cfg);
  const DepthGrid grid = grid_depth(filter_outliers(grid_survey.samples), origin);
  double sq = 0.0;
  int cells = 0;
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      if (std::isnan(grid.depth(r, c))) continue;
      const double e = grid.depth(r, c) - env.depth_at(grid.node(r, c));
      sq += e * e;
      ++cells;
    }
  }
  const double rmse = cells ? std::sqrt(sq / cells) : INFINITY;
  v.check(rmse <= 2.0 * cfg.depth_noise_sd,
          fmt("ramp grid RMSE %.4f m over %d cells (<= %.2f)", rmse, cells, 2.0 * cfg.depth_noise_sd));
  return v;
}

Verdict a10_determinism() {
  Verdict v;
  const Scenario s = load_planned("fleet4.json");
  std::string a, b;
  const RunMetrics live = run_scenario(s, &a);
  run_scenario(s, &b);
  v.check(!a.empty() && a == b, fmt("two runs produced %s logs of %zu bytes", a == b ? "identical" : "different", a.size()));

  std::istringstream in(a);
  const EventLogContents contents = read_event_log(in);
  const RunMetrics replayed = metrics_from_records(contents.records);
  v.check(!contents.truncated && replayed == live && replayed.to_json().dump() == live.to_json().dump(),
          fmt("replay of %zu records reproduces the run metrics exactly", contents.records.size()));
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"A1 performance envelope", a1_envelope}, {"A2 kill and failsafe", a2_kill},
      {"A3 mode resolution", a3_modes},         {"A4 calm-water tracking", a4_calm},
      {"A5 adverse current", a5_current},       {"A6 protocol", a6_protocol},
      {"A7 link envelope", a7_link},            {"A8 coverage", a8_coverage},
      {"A9 sensing", a9_sensing},               {"A10 determinism and replay", a10_determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict verdict;
    try {
      verdict = run();
    } catch (const std::exception& e) {
      verdict.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %-28s (%.1f s) %s\n", verdict.pass ? "PASS" : "FAIL", name, secs, verdict.detail.c_str());
    std::fflush(stdout);
    failed += !verdict.pass;
  }
  std::printf("%d/%zu acceptance criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
