#include "jetyak/sim/metrics.hpp"

#include <cmath>

#include "jetyak/autopilot/guidance.hpp"
#include "jetyak/autopilot/modes.hpp"

namespace jetyak {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double VehicleMetrics::xtrack_rms() const {
  return xtrack_samples ? std::sqrt(xtrack_sum_sq / static_cast<double>(xtrack_samples)) : 0.0;
}

bool RunMetrics::all_waypoints_hit() const {
  for (const VehicleMetrics& v : vehicles) {
    if (v.waypoints_hit != v.waypoints_total) return false;
  }
  return true;
}

nlohmann::ordered_json RunMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["duration"] = duration;
  j["frames_sent"] = frames_sent;
  j["frames_dropped"] = frames_dropped;
  j["all_waypoints_hit"] = all_waypoints_hit();
  nlohmann::ordered_json vs = nlohmann::ordered_json::array();
  for (const VehicleMetrics& v : vehicles) {
    nlohmann::ordered_json e;
    e["sys_id"] = v.sys_id;
    e["cross_track_rms"] = v.xtrack_rms();
    e["cross_track_max"] = v.xtrack_max;
    e["cross_track_samples"] = v.xtrack_samples;
    e["waypoints_total"] = v.waypoints_total;
    e["waypoints_hit"] = v.waypoints_hit;
    e["waypoints_missed_first_pass"] = v.missed_first_pass;
    e["waypoints_never_reached"] = v.never_reached;
    e["mission_complete"] = v.mission_complete;
    e["fuel_used"] = v.fuel_used();
    e["distance"] = v.distance;
    e["frames_sent"] = v.frames_sent;
    e["frames_dropped"] = v.frames_dropped;
    vs.push_back(e);
  }
  j["vehicles"] = vs;
  return j;
}

MetricsAccumulator::Track& MetricsAccumulator::track(std::uint8_t sys_id) {
  auto [it, inserted] = tracks_.try_emplace(sys_id);
  if (inserted) it->second.m.sys_id = sys_id;
  return it->second;
}

void MetricsAccumulator::close_mission(Track& tr) {
  for (bool r : tr.reached) {
    if (!r) ++tr.m.never_reached;
  }
  tr.reached.clear();
  tr.missed.clear();
  tr.xy.clear();
}

void MetricsAccumulator::consume(const LogRecord& record) {
  std::visit(
      Overloaded{
          [](const SessionStartRec&) {},
          [this](const VehicleStateRec& r) {
            t_end_ = std::max(t_end_, r.t);
            Track& tr = track(r.sys_id);
            if (!tr.have_state) {
              tr.m.fuel_start = r.fuel;
            } else {
              tr.m.distance += std::hypot(r.x - tr.last_x, r.y - tr.last_y);
            }
            tr.have_state = true;
            tr.last_x = r.x;
            tr.last_y = r.y;
            tr.m.fuel_end = r.fuel;

            const std::size_t n = tr.xy.size() / 2;
            const std::size_t i = r.active_index;
            const auto mode = static_cast<Mode>(r.mode);
            if (n == 0 || i >= n || !(mode == Mode::AutoWpOffboard || mode == Mode::AutoWpOnboard)) return;
            const LocalPoint b(tr.xy[2 * i], tr.xy[2 * i + 1]);
            const LocalPoint a = i == 0 ? LocalPoint(tr.start_x, tr.start_y)
                                        : LocalPoint(tr.xy[2 * i - 2], tr.xy[2 * i - 1]);
            const LocalPoint p(r.x, r.y);
            const double len = (b - a).norm();
            if (!tr.reached[i] && !tr.missed[i] && len > 0.0 && (b - p).norm() > tr.wp_radius &&
                (p - a).dot(b - a) / len > len) {
              tr.missed[i] = true;
              ++tr.m.missed_first_pass;
            }
            if (i >= 1 && len >= kMinStraightLeg) {
              const double e = cross_track_error(a, b, p);
              tr.m.xtrack_sum_sq += e * e;
              ++tr.m.xtrack_samples;
              tr.m.xtrack_max = std::max(tr.m.xtrack_max, std::abs(e));
            }
          },
          [this](const FrameSentRec& r) {
            Track& tr = track(r.sys_id);
            ++tr.m.frames_sent;
            if (!r.delivered) ++tr.m.frames_dropped;
          },
          [](const FrameReceivedGcsRec&) {},
          [this](const WaypointReachedRec& r) {
            Track& tr = track(r.sys_id);
            if (r.index < tr.reached.size() && !tr.reached[r.index]) {
              tr.reached[r.index] = true;
              ++tr.m.waypoints_hit;
              if (r.index + 1 == tr.reached.size()) tr.m.mission_complete = true;
            }
          },
          [this](const MissionActivatedRec& r) {
            Track& tr = track(r.sys_id);
            close_mission(tr);
            tr.xy = r.xy;
            tr.start_x = r.start_x;
            tr.start_y = r.start_y;
            tr.wp_radius = r.wp_radius;
            const std::size_t n = r.xy.size() / 2;
            tr.reached.assign(n, false);
            tr.missed.assign(n, false);
            tr.m.waypoints_total += n;
            tr.m.mission_complete = false;
          },
          [](const CommandRec&) {},
          [this](const SessionEndRec& r) { t_end_ = std::max(t_end_, r.t); },
      },
      record);
}

RunMetrics MetricsAccumulator::result() const {
  RunMetrics out;
  out.duration = t_end_;
  for (const auto& [id, tr] : tracks_) {
    VehicleMetrics m = tr.m;
    for (bool r : tr.reached) {
      if (!r) ++m.never_reached;
    }
    out.frames_sent += m.frames_sent;
    out.frames_dropped += m.frames_dropped;
    out.vehicles.push_back(m);
  }
  return out;
}

RunMetrics metrics_from_records(const std::vector<LogRecord>& records) {
  MetricsAccumulator acc;
  for (const LogRecord& r : records) acc.consume(r);
  return acc.result();
}

}  // namespace jetyak
