#include "hfslam/statecore/types.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hfslam::statecore {

double normalize_angle(double a) {
  if (!std::isfinite(a)) throw std::invalid_argument("normalize_angle: non-finite input");
  double r = std::fmod(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

Posture make_posture(double x, double y, double theta) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw std::invalid_argument("make_posture: non-finite coordinates");
  }
  return Posture{x, y, normalize_angle(theta)};
}

Posture pose_compose(const Posture& p, const Control& c) {
  const double theta = normalize_angle(p.theta + c.w);
  return Posture{p.x + c.v * std::cos(theta), p.y + c.v * std::sin(theta), theta};
}

Posture pose_compose(const Posture& p, const Control& c, const MotionNoise& noise,
                     RandomSource& rs) {
  Control noisy = c;
  noisy.w = rs.normal(c.w, noise.w_sigma);
  noisy.v = rs.normal(c.v, noise.v_sigma);
  return pose_compose(p, noisy);
}

void validate(const RangeScan& scan) {
  if (scan.angles.size() != scan.ranges.size()) {
    throw std::invalid_argument("RangeScan: angles/ranges length mismatch");
  }
  for (double r : scan.ranges) {
    if (!(r >= 0.0 && r <= scan.max_range)) {
      throw std::invalid_argument("RangeScan: range outside [0, max_range]");
    }
  }
}

int EgocentricFeature::total_count() const {
  return std::accumulate(object_histogram.begin(), object_histogram.end(), 0);
}

}  // namespace hfslam::statecore
