#include <cmath>

#include "doctest.h"

#include "jetyak/autopilot/autopilot.hpp"
#include "jetyak/autopilot/guidance.hpp"
#include "jetyak/autopilot/modes.hpp"
#include "jetyak/autopilot/pid.hpp"
#include "jetyak/autopilot/tuner.hpp"

using namespace jetyak;

namespace {

// Channel-5 band table written out by hand.
Mode expected_band_mode(double us) {
  if (us < 1230.0) return Mode::ManualRc;
  if (us < 1360.0) return Mode::AutoWpOffboard;
  if (us < 1490.0) return Mode::AutoWpOnboard;
  if (us < 1620.0) return Mode::VelocityControl;
  if (us < 1750.0) return Mode::ManualRc;
  return Mode::AutoWpOnboard;
}

SafetyInputs safety_from_bits(unsigned bits) {
  SafetyInputs s;
  s.hw_manual_switch = bits & 1u;
  s.kill_override = bits & 2u;
  s.autopilot_powered = bits & 4u;
  s.kill_line_high = bits & 8u;
  return s;
}

struct Bench {
  AutopilotConfig config;
  VehicleParams params;
  GeoPoint origin{42.36, -71.09};
  TickInputs in;
  VehicleState nav = initial_state(VehicleParams{}, LocalPoint::Zero(), Heading(0.0));

  TickOutputs tick(Autopilot& ap, double dt = 0.05) {
    nav.t += dt;
    return ap.control_tick(in, nav, dt);
  }
};

}  // namespace

TEST_SUITE("autopilot") {

TEST_CASE("mode strings round trip") {
  for (Mode m : kAllModes) CHECK(mode_from_string(to_string(m)) == m);
  CHECK_FALSE(mode_from_string("AUTO").has_value());
}

TEST_CASE("ch5 sweep reproduces the band table; the hardware switch dominates") {
  const ModeTable table;
  for (double us = 900.0; us <= 2100.0; us += 1.0) {
    RcFrame rc;
    rc.ch5_us = us;
    CHECK(resolve_mode(SafetyInputs{}, rc, table) == expected_band_mode(us));
    SafetyInputs hw;
    hw.hw_manual_switch = true;
    CHECK(resolve_mode(hw, rc, table) == Mode::ManualOnboard);
  }
  RcFrame low;
  low.ch5_us = 850.0;
  CHECK(resolve_mode(SafetyInputs{}, low, table) == Mode::ManualRc);
  RcFrame high;
  high.ch5_us = 2200.0;
  CHECK(resolve_mode(SafetyInputs{}, high, table) == Mode::AutoWpOnboard);
  for (Mode m : {Mode::ManualRc, Mode::AutoWpOffboard, Mode::AutoWpOnboard, Mode::VelocityControl}) {
    RcFrame rc;
    rc.ch5_us = table.pulse_for(m);
    CHECK(table.mode_for(rc.ch5_us) == m);
  }
}

TEST_CASE("stale RC holds the previous mode") {
  const ModeTable table;
  RcFrame rc;
  rc.ch5_us = table.pulse_for(Mode::VelocityControl);
  rc.age = table.rc_timeout + 0.1;
  CHECK(resolve_mode(SafetyInputs{}, rc, table, Mode::AutoWpOnboard) == Mode::AutoWpOnboard);
  CHECK(resolve_mode(SafetyInputs{}, rc, table, std::nullopt) == Mode::ManualRc);
  CHECK(resolve_mode(SafetyInputs{}, rc, table, Mode::ManualOnboard) == Mode::ManualRc);
}

TEST_CASE("kill relay truth table") {
  const ModeTable table;
  for (unsigned bits = 0; bits < 16; ++bits) {
    for (double ch6 : {1000.0, 1900.0}) {
      const SafetyInputs s = safety_from_bits(bits);
      RcFrame rc;
      rc.ch6_us = ch6;
      const bool kill_condition = ch6 < table.kill_below_us || !s.autopilot_powered || !s.kill_line_high;
      const bool killed = !s.kill_override && kill_condition;
      CHECK(evaluate_kill(s, rc, table) == (killed ? EngineCommand::Killed : EngineCommand::Allowed));
    }
  }
}

TEST_CASE("heading PID sign, saturation and integral clamp") {
  PidGains g;
  HeadingPid pid;
  CHECK(pid.update(g, Heading::from_degrees(10), Heading::from_degrees(0), 0.05) > 0.0);
  pid.reset();
  CHECK(pid.update(g, Heading::from_degrees(350), Heading::from_degrees(0), 0.05) < 0.0);
  pid.reset();
  CHECK(pid.update(g, Heading::from_degrees(170), Heading::from_degrees(0), 0.05) == 1.0);

  PidGains only_i{0.0, 1.0, 0.0, 0.3, 5.0};
  HeadingPid acc;
  double out = 0.0;
  for (int k = 0; k < 1000; ++k) out = acc.update(only_i, Heading(0.2), Heading(0.0), 0.05);
  CHECK(out == doctest::Approx(0.3));
  CHECK_THROWS_AS((PidGains{-1.0, 0.0, 0.0, 0.3, 5.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PidGains{1.0, 0.0, 0.0, 0.3, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("cross-track error and pursuit point") {
  const LocalPoint a(0, 0);
  const LocalPoint b(0, 100);
  CHECK(cross_track_error(a, b, LocalPoint(3, 50)) == doctest::Approx(3.0));
  CHECK(cross_track_error(a, b, LocalPoint(-2, 10)) == doctest::Approx(-2.0));
  CHECK(pursuit_point(a, b, LocalPoint(5, 20), 8.0).isApprox(LocalPoint(0, 28)));
  CHECK(pursuit_point(a, b, LocalPoint(5, 97), 8.0).isApprox(b));
}

TEST_CASE("speed loop feed-forward") {
  const double v_max = 6.0;
  CHECK(speed_loop(3.0, 3.0, v_max, 0.5) == doctest::Approx(0.5));
  CHECK(speed_loop(3.0, 2.0, v_max, 0.5) > 0.5);
  CHECK(speed_loop(100.0, 0.0, v_max, 0.5) == doctest::Approx(1.0));
  CHECK(speed_loop(0.0, 3.0, v_max, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("guidance accepts waypoints inside the radius in order") {
  WaypointGuidance g({LocalPoint(0, 10), LocalPoint(0, 12), LocalPoint(50, 12)}, {2.0, 2.0, 2.0}, LocalPoint::Zero());
  PidGains gains;
  VehicleState s;
  s.pos = LocalPoint(0, 8);
  const GuidanceOutput out = g.update(s, gains, GuidanceConfig{}, 6.0);
  CHECK(out.accepted == std::vector<std::size_t>{0, 1});
  CHECK(out.active_index == 2);
  CHECK(out.psi_des.degrees() > 45.0);
  CHECK(out.psi_des.degrees() < 90.0);
  s.pos = LocalPoint(48, 12);
  CHECK(g.update(s, gains, GuidanceConfig{}, 6.0).done);
}

TEST_CASE("GCS mode command holds until the ch5 band changes") {
  Bench b;
  b.in.rc.ch5_us = b.config.modes.pulse_for(Mode::ManualRc);
  Autopilot ap(b.config, b.params, b.origin);
  CHECK(b.tick(ap).mode == Mode::ManualRc);
  ap.enqueue(SetModeCommand{Mode::VelocityControl});
  CHECK(b.tick(ap).mode == Mode::VelocityControl);
  CHECK(b.tick(ap).mode == Mode::VelocityControl);
  b.in.rc.ch5_us = b.config.modes.pulse_for(Mode::AutoWpOnboard);
  CHECK(b.tick(ap).mode == Mode::AutoWpOnboard);
  ap.enqueue(SetModeCommand{Mode::ManualOnboard});
  CHECK(b.tick(ap).mode == Mode::AutoWpOnboard);
  b.in.safety.hw_manual_switch = true;
  b.in.joystick.steering = PwmSignal{1234.0};
  const TickOutputs out = b.tick(ap);
  CHECK(out.mode == Mode::ManualOnboard);
  CHECK(out.steering.pulse_us == 1234.0);
}

TEST_CASE("remote kill latches until cleared") {
  Bench b;
  Autopilot ap(b.config, b.params, b.origin);
  CHECK(b.tick(ap).engine == EngineCommand::Allowed);
  ap.enqueue(KillCommand{});
  for (int k = 0; k < 10; ++k) {
    const TickOutputs out = b.tick(ap);
    CHECK(out.engine == EngineCommand::Killed);
    CHECK_FALSE(out.kill_line_high);
  }
  ap.clear_remote_kill();
  CHECK(b.tick(ap).engine == EngineCommand::Allowed);
  b.in.safety.kill_override = true;
  ap.enqueue(KillCommand{});
  CHECK(b.tick(ap).engine == EngineCommand::Allowed);
}

TEST_CASE("RC loss in MANUAL_RC kills; in auto modes it does not") {
  Bench b;
  Autopilot ap(b.config, b.params, b.origin);
  b.in.rc.age = b.config.modes.rc_timeout + 0.5;
  CHECK(b.tick(ap).engine == EngineCommand::Killed);

  Bench c;
  c.in.rc.ch5_us = c.config.modes.pulse_for(Mode::AutoWpOnboard);
  Autopilot ap2(c.config, c.params, c.origin);
  CHECK(c.tick(ap2).mode == Mode::AutoWpOnboard);
  c.in.rc.age = c.config.modes.rc_timeout + 0.5;
  const TickOutputs out = c.tick(ap2);
  CHECK(out.mode == Mode::AutoWpOnboard);
  CHECK(out.engine == EngineCommand::Allowed);
}

TEST_CASE("velocity setpoints time out to trim") {
  Bench b;
  b.in.rc.ch5_us = b.config.modes.pulse_for(Mode::VelocityControl);
  Autopilot ap(b.config, b.params, b.origin);
  ap.enqueue(VelocitySetpoint{0.5, 3.0});
  TickOutputs out = b.tick(ap);
  CHECK(out.steering.pulse_us == doctest::Approx(1700.0));
  CHECK(out.throttle.pulse_us > 1500.0);
  for (int k = 0; k < 30; ++k) out = b.tick(ap);
  CHECK(out.steering.pulse_us == doctest::Approx(1500.0));
  CHECK(out.throttle.pulse_us == doctest::Approx(1500.0));
}

TEST_CASE("auto-tune output re-evaluates as passing") {
  const VehicleParams params;
  TuneConfig cfg;
  PidGains sluggish;
  sluggish.p = 0.3;
  sluggish.i = 0.0;
  const TuneResult r = auto_tune(params, sluggish, cfg);
  REQUIRE(r.converged);
  // Independent re-evaluation of the returned gains.
  const TuneMetrics m = evaluate_gains(params, r.gains, cfg);
  CHECK(meets_criteria(m, cfg.criteria));
  CHECK(m.oscillations <= cfg.criteria.max_oscillations);
  CHECK(m.turn_time_ratio <= cfg.criteria.max_turn_time_ratio);
  CHECK(m.chatter_rate <= cfg.criteria.max_chatter_rate);
  CHECK(std::abs(m.bias) <= cfg.criteria.max_bias);

  const TuneResult same = auto_tune(params, r.gains, cfg);
  CHECK(same.gains == r.gains);
}

}  // TEST_SUITE
