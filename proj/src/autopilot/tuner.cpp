#include "jetyak/autopilot/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jetyak {

namespace {

struct Trial {
  std::vector<double> time;
  std::vector<LocalPoint> pos;
  std::vector<double> psi;
  std::vector<double> steering;
  std::vector<std::size_t> active;
};

// Closed-loop run of guidance + heading PID against the plant in calm water.
Trial run_trial(const VehicleParams& params, const PidGains& gains, const TuneConfig& config,
                WaypointGuidance guidance, VehicleState state, double duration) {
  const EnvironmentField calm;
  HeadingPid pid;
  Trial trial;
  const auto steps = static_cast<int>(std::lround(duration / config.dt));
  for (int k = 0; k < steps; ++k) {
    const GuidanceOutput g = guidance.update(state, gains, config.guidance, params.v_max);
    double steer = 0.0;
    double throttle = 0.0;
    if (!g.done) {
      steer = pid.update(gains, g.psi_des, state.psi, config.dt);
      throttle = g.throttle;
    }
    trial.time.push_back(state.t);
    trial.pos.push_back(state.pos);
    trial.psi.push_back(state.psi.radians());
    trial.steering.push_back(steer);
    trial.active.push_back(guidance.active_index());
    state = step(state, params, normalized_to_pwm(steer, params.steering_servo),
                 normalized_to_pwm(throttle, params.throttle_servo), calm, config.dt);
    if (g.done) break;
  }
  return trial;
}

VehicleState moving_state(const VehicleParams& params, const LocalPoint& pos, double psi,
                          double speed) {
  VehicleState s = initial_state(params, pos, Heading(psi));
  s.v_water = speed;
  return s;
}

int count_crossings(const std::vector<double>& y, double hysteresis) {
  int side = 0;
  int crossings = 0;
  for (double v : y) {
    const int s = v > hysteresis ? 1 : (v < -hysteresis ? -1 : 0);
    if (s == 0) continue;
    if (side != 0 && s != side) ++crossings;
    side = s;
  }
  return crossings;
}

double chatter_rate(const std::vector<double>& steering, double dt) {
  constexpr double kDeadband = 0.05;
  int flips = 0;
  for (std::size_t k = 1; k < steering.size(); ++k) {
    const double a = steering[k - 1];
    const double b = steering[k];
    if (std::abs(a) > kDeadband && std::abs(b) > kDeadband && (a > 0.0) != (b > 0.0)) ++flips;
  }
  const double duration = dt * static_cast<double>(std::max<std::size_t>(steering.size(), 1));
  return flips / duration;
}

}  // namespace

TuneMetrics evaluate_gains(const VehicleParams& params, const PidGains& gains,
                           const TuneConfig& config) {
  TuneMetrics m;
  const double v = config.speed;

  // Line capture: parallel to a northbound line, offset to the east.
  {
    const LocalPoint a(0.0, 0.0);
    const LocalPoint b(0.0, 2000.0);
    WaypointGuidance g({b}, {v}, a);
    const Trial t = run_trial(params, gains, config, g,
                              moving_state(params, LocalPoint(config.line_offset, 0.0), 0.0, v), 120.0);
    std::vector<double> y;
    y.reserve(t.pos.size());
    for (const LocalPoint& p : t.pos) y.push_back(cross_track_error(a, b, p));
    m.oscillations = count_crossings(y, 0.25);
    m.chatter_rate = chatter_rate(t.steering, config.dt);
    m.settle_time = t.time.empty() ? 0.0 : t.time.back();
    for (std::size_t k = y.size(); k-- > 0;) {
      if (std::abs(y[k]) >= 0.5) {
        m.settle_time = t.time[k];
        break;
      }
      if (k == 0) m.settle_time = 0.0;
    }
    const double window_start = t.time.empty() ? 0.0 : t.time.back() - 20.0;
    double sum = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (t.time[k] >= window_start) {
        sum += y[k];
        ++n;
      }
    }
    m.bias = n ? sum / n : 0.0;
  }

  // Turn trial: heading north, target line runs east from the start point.
  {
    const LocalPoint a(0.0, 0.0);
    WaypointGuidance g({LocalPoint(2000.0, 0.0)}, {v}, a);
    const Trial t = run_trial(params, gains, config, g, moving_state(params, a, 0.0, v), 60.0);
    const double goal = deg_to_rad(80.0);
    double t80 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < t.psi.size(); ++k) {
      const double psi = t.psi[k];
      if (psi >= goal && psi <= kPi<double>) {
        t80 = t.time[k];
        break;
      }
    }
    const double ideal = goal * params.r_min / v;
    m.turn_time_ratio = t80 / ideal;
  }

  // Corner trial: north 100 m, then a right-angle turn to the east.
  {
    const LocalPoint corner(0.0, 100.0);
    WaypointGuidance g({corner, LocalPoint(150.0, 100.0)}, {v, v}, LocalPoint(0.0, 0.0));
    const Trial t = run_trial(params, gains, config, g,
                              moving_state(params, LocalPoint(0.0, 0.0), 0.0, v), 120.0);
    m.corner_cut = std::numeric_limits<double>::infinity();
    m.corner_overshoot = 0.0;
    bool reached_corner = false;
    for (std::size_t k = 0; k < t.pos.size(); ++k) {
      m.corner_cut = std::min(m.corner_cut, (t.pos[k] - corner).norm());
      if (t.active[k] >= 1) {
        reached_corner = true;
        m.corner_overshoot = std::max(m.corner_overshoot, t.pos[k].y() - corner.y());
      }
    }
    m.corner_reached = reached_corner && g.waypoints().size() == 2 &&
                       !t.active.empty() && (t.active.back() >= 1);
  }
  return m;
}

bool meets_criteria(const TuneMetrics& m, const TuneCriteria& c) {
  return m.oscillations <= c.max_oscillations && m.turn_time_ratio <= c.max_turn_time_ratio &&
         m.chatter_rate <= c.max_chatter_rate && std::abs(m.bias) < c.max_bias &&
         m.corner_reached && m.corner_overshoot <= c.max_corner_overshoot &&
         m.corner_cut <= c.max_corner_cut;
}

namespace {

double badness(const TuneMetrics& m, const TuneCriteria& c) {
  double b = 0.0;
  b += std::max(0, m.oscillations - c.max_oscillations);
  b += std::max(0.0, std::min(m.turn_time_ratio, 1e3) / c.max_turn_time_ratio - 1.0);
  b += std::max(0.0, m.chatter_rate / c.max_chatter_rate - 1.0);
  b += std::max(0.0, std::abs(m.bias) / c.max_bias - 1.0);
  b += std::max(0.0, m.corner_overshoot / c.max_corner_overshoot - 1.0);
  b += m.corner_reached ? 0.0 : 1.0;
  return b;
}

std::string describe(const PidGains& g) {
  std::ostringstream os;
  os << "p=" << g.p << " i=" << g.i << " d=" << g.d << " wp_radius=" << g.wp_radius;
  return os.str();
}

}  // namespace

TuneResult auto_tune(const VehicleParams& params, const PidGains& initial, const TuneConfig& config) {
  initial.validate();
  TuneResult result;
  result.gains = initial;
  PidGains g = initial;
  double best = std::numeric_limits<double>::infinity();
  const TuneCriteria& c = config.criteria;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const TuneMetrics m = evaluate_gains(params, g, config);
    result.iterations = iter + 1;
    const double score = badness(m, c);
    if (score < best) {
      best = score;
      result.gains = g;
      result.metrics = m;
    }
    if (meets_criteria(m, c)) {
      result.gains = g;
      result.metrics = m;
      result.converged = true;
      return result;
    }

    std::string rule;
    if (m.turn_time_ratio > c.max_turn_time_ratio) {
      g.p *= 1.25;
      rule = "turns too slowly: increase P";
    } else if (m.chatter_rate > c.max_chatter_rate) {
      if (g.d > 1e-4) {
        g.d *= 0.5;
        rule = "high-frequency chatter: decrease D";
      } else {
        g.p *= 0.8;
        rule = "chatter with negligible D: decrease P";
      }
    } else if (m.oscillations > c.max_oscillations) {
      g.p *= 0.85;
      g.d += 0.005;
      rule = "oscillates before finding the line: decrease P, increase D";
    } else if (std::abs(m.bias) >= c.max_bias) {
      if (m.oscillations > 0) {
        g.i *= 0.5;
        rule = "low-frequency oscillation: decrease I";
      } else {
        g.i += 0.05;
        rule = "steady cross-track bias: increase I";
      }
    } else if (!m.corner_reached || m.corner_overshoot > c.max_corner_overshoot) {
      g.wp_radius += 0.5;
      rule = "turns too late at the waypoint: increase waypoint radius";
    } else if (m.corner_cut > c.max_corner_cut) {
      g.wp_radius = std::max(0.5, g.wp_radius - 0.5);
      rule = "turns before the waypoint: decrease waypoint radius";
    }
    result.log.push_back("iteration " + std::to_string(iter + 1) + ": " + rule + " -> " +
                         describe(g));
  }
  return result;
}

}  // namespace jetyak
