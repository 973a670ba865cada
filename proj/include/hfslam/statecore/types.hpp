#pragma once

/**
 * Shared domain types used by every other module.
 *
 * Conventions fixed here once so the filters, the simulator, and the test
 * oracles agree:
 * - planar SE(2) pose, heading normalized into (-pi, pi]
 * - per-step velocity units (one shared discrete clock, no dt plumbing)
 * - rotate-then-translate motion composition
 */

#include <cstdint>
#include <vector>

#include "hfslam/statecore/random.hpp"

namespace hfslam::statecore {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on
/// non-finite input. Idempotent.
double normalize_angle(double a);

/// Planar pose: position in meters, heading in radians in (-pi, pi].
struct Posture {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  bool operator==(const Posture&) const = default;
};

/// Validates finiteness and returns a Posture with normalized heading.
Posture make_posture(double x, double y, double theta);

enum class SpeedSource : std::uint8_t { commanded, estimated };

/// Per-step motion command. v may be internally estimated rather than
/// commanded (speed is not an input signal in the update cycle; see
/// hfpgm::estimate_speed), which source_of_v records.
struct Control {
  double v = 0.0;  // meters/step
  double w = 0.0;  // radians/step
  SpeedSource source_of_v = SpeedSource::commanded;

  bool operator==(const Control&) const = default;
};

/// Standard deviations for actuation noise applied to (v, w) before
/// composition. Zero sigmas make pose_compose deterministic.
struct MotionNoise {
  double v_sigma = 0.0;
  double w_sigma = 0.0;
};

/// Deterministic motion composition: theta' = wrap(theta + w),
/// x' = x + v cos(theta'), y' = y + v sin(theta').
Posture pose_compose(const Posture& p, const Control& c);

/// Noisy variant: v and w perturbed by zero-mean Gaussians (w first, then v;
/// two draws per call) before the deterministic composition.
Posture pose_compose(const Posture& p, const Control& c, const MotionNoise& noise,
                     RandomSource& rs);

/// One sweep of range readings. angles are sensor-relative; readings are
/// clipped to [0, max_range].
struct RangeScan {
  std::vector<double> angles;
  std::vector<double> ranges;
  double max_range = 0.0;

  bool operator==(const RangeScan&) const = default;
};

/// Throws std::invalid_argument if lengths differ or a range is outside
/// [0, max_range].
void validate(const RangeScan& scan);

/// Proximal visual summary: counts of object types seen within the
/// proximity radius, plus a categorical landscape code for the coarse
/// appearance of the surroundings.
struct EgocentricFeature {
  std::vector<int> object_histogram;
  int landscape_code = 0;

  int total_count() const;
  bool operator==(const EgocentricFeature&) const = default;
};

/// One step of sensor data as consumed by the filters. t is strictly
/// increasing within a log.
struct Observation {
  int t = 0;
  RangeScan scan;
  EgocentricFeature ego;
  Control control;
};

}  // namespace hfslam::statecore
