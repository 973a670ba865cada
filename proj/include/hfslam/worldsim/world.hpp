#pragma once

/**
 * Deterministic 2D grid-world simulator. Produces the range scans
 * (allocentric stream), proximal object features (egocentric stream),
 * ground-truth poses and room labels the filters are scored against.
 */

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hfslam/statecore/gridtrace.hpp"
#include "hfslam/statecore/random.hpp"
#include "hfslam/statecore/types.hpp"

namespace hfslam::worldsim {

struct Room {
  std::string label;
  int landscape_code = 0;
  // cell rectangle, half-open: [x0, x1) x [y0, y1)
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool contains_cell(int cx, int cy) const {
    return cx >= x0 && cx < x1 && cy >= y0 && cy < y1;
  }
};

struct WorldObject {
  int type = 0;
  double x = 0.0, y = 0.0;
};

struct SensorConfig {
  int beams = 8;
  double fov = 2.0 * statecore::kPi;
  double max_range = 5.0;
  double range_sigma = 0.0;
};

struct WorldSpec {
  std::string name;
  statecore::GridSpec grid;
  std::vector<std::uint8_t> walls;  // row-major, 1 = wall
  std::vector<Room> rooms;
  std::vector<WorldObject> objects;
  SensorConfig sensor;
  double proximity_radius = 1.0;
  double feature_flip_prob = 0.0;
  statecore::MotionNoise actuation;
  int n_object_types = 1;
  int n_landscape_codes = 1;

  bool wall_at(int cx, int cy) const {
    if (!grid.contains(cx, cy)) return true;  // everything outside is solid
    return walls[grid.index(cx, cy)] != 0;
  }
  bool free_at(double x, double y) const {
    return !wall_at(grid.cell_x(x), grid.cell_y(y));
  }
  const Room* room_at(double x, double y) const;

  /// Structural checks: rooms non-overlapping and covering every free cell,
  /// objects in free cells, noise parameters non-negative.
  void validate() const;

  static WorldSpec load(std::istream& in);
  void save(std::ostream& out) const;

  /// Debug renderer: '#' walls, '.' free, object type digits, room borders
  /// are not drawn.
  std::string ascii_map() const;
};

/// Per-beam distance to the first wall via shared grid traversal, clipped to
/// max_range, plus Gaussian range noise when configured (one draw per beam).
/// Throws std::invalid_argument when the pose is inside a wall.
statecore::RangeScan raycast(const WorldSpec& w, const statecore::Posture& pose,
                             statecore::RandomSource* noise = nullptr);

/// Evenly spaced sensor-relative beam angles over the field of view.
std::vector<double> beam_angles(const SensorConfig& s);

/// Histogram of object types within the proximity radius and line of sight,
/// each count flipped to a uniformly random type with feature_flip_prob;
/// landscape code of the containing room.
statecore::EgocentricFeature sense_egocentric(const WorldSpec& w, const statecore::Posture& pose,
                                              statecore::RandomSource& rs);

}  // namespace hfslam::worldsim
