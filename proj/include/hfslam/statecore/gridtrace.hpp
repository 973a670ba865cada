#pragma once

/**
 * Grid ray traversal shared by the simulator and the mapper. Both sides must
 * walk cells with identical arithmetic: predicted scans are compared against
 * simulated scans for exact equality once a map has converged, which only
 * holds if the two ray casts are the same code.
 */

#include <functional>

namespace hfslam::statecore {

/// Geometry of a cell grid. Cell (cx, cy) spans
/// [origin + c*resolution, origin + (c+1)*resolution) on each axis.
struct GridSpec {
  int width = 0;
  int height = 0;
  double resolution = 1.0;
  double origin_x = 0.0;
  double origin_y = 0.0;

  bool contains(int cx, int cy) const {
    return cx >= 0 && cy >= 0 && cx < width && cy < height;
  }
  int cell_x(double x) const;
  int cell_y(double y) const;
  double center_x(int cx) const { return origin_x + (cx + 0.5) * resolution; }
  double center_y(int cy) const { return origin_y + (cy + 0.5) * resolution; }
  int index(int cx, int cy) const { return cy * width + cx; }

  bool operator==(const GridSpec&) const = default;
};

/// Called per visited cell with the distances along the ray at which the
/// cell is entered and left (exit clipped to max_range on the last cell).
/// Return false to stop the walk.
using CellVisitor = std::function<bool(int cx, int cy, double entry, double exit)>;

/// Amanatides-Woo traversal from (px, py) along direction dir (radians) for
/// at most max_range meters. Cells outside the grid are skipped, not
/// visited, but the walk continues through them. Ties between crossing a
/// vertical and a horizontal boundary step x first.
void walk_cells(const GridSpec& g, double px, double py, double dir, double max_range,
                const CellVisitor& visit);

struct RayHit {
  bool hit = false;
  double range = 0.0;  // entry distance of the hit cell, or max_range
  int cx = -1;
  int cy = -1;
};

/// First cell along the ray for which occupied() is true. Cells outside the
/// grid count as free. If the starting cell is occupied the hit range is 0.
RayHit trace_ray(const GridSpec& g, double px, double py, double dir, double max_range,
                 const std::function<bool(int, int)>& occupied);

}  // namespace hfslam::statecore
