#include "hfslam/worldsim/episode.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hfslam::worldsim {

using statecore::Control;
using statecore::Observation;
using statecore::Posture;
using statecore::RandomSource;
using statecore::Record;
using statecore::RecordReader;
using statecore::RecordWriter;
using statecore::SpeedSource;

TrajectoryScript TrajectoryScript::load(std::istream& in) {
  RecordReader reader(in, "script");
  TrajectoryScript s;
  bool have_start = false;
  Record r;
  while (reader.next(r)) {
    if (r.name == "start") {
      s.start = statecore::decode_posture(r);
      have_start = true;
    } else if (r.name == "control") {
      Control c;
      c.v = r.get_double("v");
      c.w = r.get_double("w");
      s.controls.push_back(c);
    } else if (r.name == "waypoint") {
      s.waypoints.emplace_back(r.get_double("x"), r.get_double("y"));
    } else if (r.name == "follower") {
      s.steps = static_cast<int>(r.get_int("steps"));
      s.v_max = r.get_double("v_max");
      s.w_max = r.get_double("w_max");
      s.arrive_tol = r.get_double("arrive_tol");
    } else {
      throw ParseError("unknown script record '" + r.name + "'", r.line);
    }
  }
  if (!have_start) throw ParseError("script missing start record", 0);
  if (!s.controls.empty() && !s.waypoints.empty()) {
    throw ParseError("script mixes control and waypoint records", 0);
  }
  if (s.controls.empty() && s.waypoints.empty()) {
    throw ParseError("script has no motion records", 0);
  }
  if (s.is_waypoint_script() && s.steps <= 0) {
    throw ParseError("waypoint script needs a follower record with steps > 0", 0);
  }
  return s;
}

void TrajectoryScript::save(std::ostream& out) const {
  RecordWriter w(out, "script");
  w.write(statecore::encode_posture("start", start));
  for (const auto& c : controls) {
    Record r;
    r.name = "control";
    r.add("v", c.v).add("w", c.w);
    w.write(r);
  }
  for (const auto& [x, y] : waypoints) {
    Record r;
    r.name = "waypoint";
    r.add("x", x).add("y", y);
    w.write(r);
  }
  if (is_waypoint_script()) {
    Record r;
    r.name = "follower";
    r.add("steps", steps).add("v_max", v_max).add("w_max", w_max).add("arrive_tol", arrive_tol);
    w.write(r);
  }
}

namespace {

/// True when the straight segment from a to b crosses only free cells.
bool segment_free(const WorldSpec& w, const Posture& a, double bx, double by) {
  if (!w.free_at(bx, by)) return false;
  const double dist = std::hypot(bx - a.x, by - a.y);
  if (dist < 1e-12) return true;
  const double dir = std::atan2(by - a.y, bx - a.x);
  const auto hit = statecore::trace_ray(w.grid, a.x, a.y, dir, dist,
                                        [&](int cx, int cy) { return w.wall_at(cx, cy); });
  return !hit.hit;
}

struct Follower {
  std::size_t next = 0;

  // Constant forward speed, heading steered toward the active waypoint.
  Control command(const TrajectoryScript& s, const Posture& pose) {
    const auto& [wx, wy] = s.waypoints[next];
    if (std::hypot(wx - pose.x, wy - pose.y) < s.arrive_tol) {
      next = (next + 1) % s.waypoints.size();
    }
    const auto& [tx, ty] = s.waypoints[next];
    const double desired = std::atan2(ty - pose.y, tx - pose.x);
    const double err = statecore::normalize_angle(desired - pose.theta);
    Control c;
    c.w = std::clamp(err, -s.w_max, s.w_max);
    c.v = s.v_max;
    return c;
  }
};

void check_zero_noise_feasibility(const WorldSpec& w, const TrajectoryScript& s) {
  Posture pose = s.start;
  for (std::size_t i = 0; i < s.controls.size(); ++i) {
    const Posture next = pose_compose(pose, s.controls[i]);
    if (!segment_free(w, pose, next.x, next.y)) {
      throw std::invalid_argument("script leaves free space at step " + std::to_string(i + 1) +
                                  " under zero noise");
    }
    pose = next;
  }
}

}  // namespace

EpisodeLog run_episode(const WorldSpec& w, const TrajectoryScript& script, RandomSource& rs) {
  w.validate();
  if (!w.free_at(script.start.x, script.start.y)) {
    throw std::invalid_argument("script start pose is inside a wall");
  }
  if (!script.is_waypoint_script()) {
    check_zero_noise_feasibility(w, script);
  } else {
    for (const auto& [x, y] : script.waypoints) {
      if (!w.free_at(x, y)) throw std::invalid_argument("waypoint inside a wall");
    }
  }

  EpisodeLog log;
  log.start = script.start;
  Posture pose = script.start;
  Follower follower;
  const int T = script.length();
  log.steps.reserve(T);

  for (int t = 1; t <= T; ++t) {
    const Control commanded = script.is_waypoint_script()
                                  ? follower.command(script, pose)
                                  : script.controls[t - 1];

    // noise draws happen whether or not the move is accepted
    const Posture attempted = pose_compose(pose, commanded, w.actuation, rs);
    Control executed = commanded;
    if (segment_free(w, pose, attempted.x, attempted.y)) {
      pose = attempted;
    } else {
      executed = Control{};  // stop in place, recorded as executed-zero
    }

    EpisodeStep step;
    step.obs.t = t;
    step.obs.control = executed;
    step.obs.scan = raycast(w, pose, &rs);
    step.obs.ego = sense_egocentric(w, pose, rs);
    step.true_pose = pose;
    const Room* room = w.room_at(pose.x, pose.y);
    step.room = room != nullptr ? room->label : "none";
    log.steps.push_back(std::move(step));
  }
  return log;
}

void write_observation_log(std::ostream& out, const EpisodeLog& log,
                           const std::vector<std::pair<std::string, std::string>>& meta) {
  RecordWriter w(out, "obslog", 1, meta);
  w.write(statecore::encode_posture("start", log.start));
  for (const auto& s : log.steps) w.write(statecore::encode_observation(s.obs));
}

void write_truth_log(std::ostream& out, const EpisodeLog& log,
                     const std::vector<std::pair<std::string, std::string>>& meta) {
  RecordWriter w(out, "truthlog", 1, meta);
  w.write(statecore::encode_posture("start", log.start));
  for (const auto& s : log.steps) {
    w.write(statecore::encode_truth({s.obs.t, s.true_pose, s.room}));
  }
}

ObservationLog read_observation_log(std::istream& in) {
  RecordReader reader(in, "obslog");
  ObservationLog log;
  bool have_start = false;
  int last_t = 0;
  Record r;
  while (reader.next(r)) {
    if (r.name == "start") {
      log.start = statecore::decode_posture(r);
      have_start = true;
    } else {
      auto obs = statecore::decode_observation(r);
      if (obs.t <= last_t) throw ParseError("observation steps must strictly increase", r.line);
      last_t = obs.t;
      log.observations.push_back(std::move(obs));
    }
  }
  if (!have_start) throw ParseError("observation log missing start record", 0);
  return log;
}

TruthLog read_truth_log(std::istream& in) {
  RecordReader reader(in, "truthlog");
  TruthLog log;
  bool have_start = false;
  Record r;
  while (reader.next(r)) {
    if (r.name == "start") {
      log.start = statecore::decode_posture(r);
      have_start = true;
    } else {
      log.entries.push_back(statecore::decode_truth(r));
    }
  }
  if (!have_start) throw ParseError("truth log missing start record", 0);
  return log;
}

}  // namespace hfslam::worldsim
