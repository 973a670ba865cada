#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hfslam/statecore/textio.hpp"
#include "hfslam/worldsim/world.hpp"

namespace hfslam::worldsim {

/**
 * Motion plan for an episode: either a raw control sequence, or a cyclic
 * waypoint list with a simple proportional follower steered off the true
 * pose. Control scripts are checked at load time against the world: under
 * zero noise they must stay in free space.
 */
struct TrajectoryScript {
  statecore::Posture start;
  std::vector<statecore::Control> controls;  // exclusive with waypoints
  std::vector<std::pair<double, double>> waypoints;
  int steps = 0;          // episode length for waypoint scripts
  double v_max = 0.3;
  double w_max = 0.5;
  double arrive_tol = 0.5;

  bool is_waypoint_script() const { return !waypoints.empty(); }
  int length() const {
    return is_waypoint_script() ? steps : static_cast<int>(controls.size());
  }

  static TrajectoryScript load(std::istream& in);
  void save(std::ostream& out) const;
};

struct EpisodeStep {
  statecore::Observation obs;
  statecore::Posture true_pose;
  std::string room;
};

struct EpisodeLog {
  statecore::Posture start;
  std::vector<EpisodeStep> steps;
};

/// Runs the script for its full length. Actuation noise perturbs each
/// executed control; a move whose path or endpoint leaves free space is
/// rejected (pose unchanged, control recorded as executed-zero). Throws
/// std::invalid_argument when a control script escapes free space under
/// zero noise, which is validated before execution.
EpisodeLog run_episode(const WorldSpec& w, const TrajectoryScript& script,
                       statecore::RandomSource& rs);

/// Log writers/readers for the two episode output files.
void write_observation_log(std::ostream& out, const EpisodeLog& log,
                           const std::vector<std::pair<std::string, std::string>>& meta);
void write_truth_log(std::ostream& out, const EpisodeLog& log,
                     const std::vector<std::pair<std::string, std::string>>& meta);

struct ObservationLog {
  statecore::Posture start;
  std::vector<statecore::Observation> observations;
};

ObservationLog read_observation_log(std::istream& in);

struct TruthLog {
  statecore::Posture start;
  std::vector<statecore::TruthEntry> entries;
};

TruthLog read_truth_log(std::istream& in);

}  // namespace hfslam::worldsim
