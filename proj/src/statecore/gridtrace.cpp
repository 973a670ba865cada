#include "hfslam/statecore/gridtrace.hpp"

#include <cmath>
#include <limits>

namespace hfslam::statecore {

int GridSpec::cell_x(double x) const {
  return static_cast<int>(std::floor((x - origin_x) / resolution));
}

int GridSpec::cell_y(double y) const {
  return static_cast<int>(std::floor((y - origin_y) / resolution));
}

void walk_cells(const GridSpec& g, double px, double py, double dir, double max_range,
                const CellVisitor& visit) {
  const double dx = std::cos(dir);
  const double dy = std::sin(dir);
  const double inf = std::numeric_limits<double>::infinity();

  int cx = g.cell_x(px);
  int cy = g.cell_y(py);
  const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);

  // Distance along the ray to the next vertical / horizontal cell boundary.
  double t_max_x = inf;
  double t_delta_x = inf;
  if (step_x != 0) {
    const double next_bx =
        g.origin_x + (cx + (step_x > 0 ? 1 : 0)) * g.resolution;
    t_max_x = (next_bx - px) / dx;
    t_delta_x = g.resolution / std::abs(dx);
  }
  double t_max_y = inf;
  double t_delta_y = inf;
  if (step_y != 0) {
    const double next_by =
        g.origin_y + (cy + (step_y > 0 ? 1 : 0)) * g.resolution;
    t_max_y = (next_by - py) / dy;
    t_delta_y = g.resolution / std::abs(dy);
  }

  double entry = 0.0;
  while (entry < max_range) {
    // x-then-y on exact boundary ties
    const bool take_x = t_max_x <= t_max_y;
    const double exit = take_x ? t_max_x : t_max_y;
    const double clipped_exit = exit < max_range ? exit : max_range;
    if (g.contains(cx, cy)) {
      if (!visit(cx, cy, entry, clipped_exit)) return;
    }
    if (exit >= max_range) return;
    if (take_x) {
      cx += step_x;
      t_max_x += t_delta_x;
    } else {
      cy += step_y;
      t_max_y += t_delta_y;
    }
    entry = exit;
  }
}

RayHit trace_ray(const GridSpec& g, double px, double py, double dir, double max_range,
                 const std::function<bool(int, int)>& occupied) {
  RayHit result;
  result.range = max_range;
  walk_cells(g, px, py, dir, max_range, [&](int cx, int cy, double entry, double) {
    if (occupied(cx, cy)) {
      result.hit = true;
      result.range = entry;
      result.cx = cx;
      result.cy = cy;
      return false;
    }
    return true;
  });
  return result;
}

}  // namespace hfslam::statecore
