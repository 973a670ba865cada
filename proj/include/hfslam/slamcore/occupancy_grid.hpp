#pragma once

#include <iosfwd>
#include <vector>

#include "hfslam/statecore/gridtrace.hpp"
#include "hfslam/statecore/types.hpp"

namespace hfslam::slamcore {

/// Log-odds occupancy map. Cells start at 0 (probability 0.5, unknown) and
/// are clamped to [-l_max, +l_max].
struct OccupancyGrid {
  statecore::GridSpec spec;
  double l_max = 10.0;
  std::vector<double> logodds;

  OccupancyGrid() = default;
  OccupancyGrid(const statecore::GridSpec& s, double clamp = 10.0)
      : spec(s), l_max(clamp), logodds(static_cast<std::size_t>(s.width) * s.height, 0.0) {}

  double at(int cx, int cy) const { return logodds[spec.index(cx, cy)]; }
  double prob(int cx, int cy) const;
  bool occupied(int cx, int cy) const { return at(cx, cy) > 0.0; }
  bool known(int cx, int cy) const { return at(cx, cy) != 0.0; }
  void bump(int cx, int cy, double delta);

  /// Grey-map text export: probability per cell, row-major, one row per
  /// line, preceded by a metadata header (grid geometry plus extra_meta).
  void save(std::ostream& out,
            const std::vector<std::pair<std::string, std::string>>& extra_meta = {}) const;
  static OccupancyGrid load(std::istream& in);
};

/// Inverse sensor increments for integrate_scan.
struct InverseSensorModel {
  double l_occ = 0.85;
  double l_free = -0.4;
};

/// Likelihood-field parameters for scan_likelihood. hit_weight and
/// random_weight should sum to 1; beam_stride subsamples beams.
struct SensorModelConfig {
  double sigma = 0.2;
  double hit_weight = 0.9;
  double random_weight = 0.1;
  int beam_stride = 1;

  void validate() const;
};

/// Exact Euclidean distance (in meters, between cell centers) from every
/// cell to the nearest occupied cell. Infinite when the map has no occupied
/// cells.
struct DistanceField {
  statecore::GridSpec spec;
  std::vector<double> dist;

  static DistanceField build(const OccupancyGrid& map);
  /// Distance looked up at the cell containing the world point; +inf
  /// outside the grid or when no cell is occupied.
  double at_world(double x, double y) const;
};

/// Likelihood-field scan model: product over sampled beams of
///   hit_weight * exp(-d^2 / 2 sigma^2) + random_weight / max_range,
/// d the distance from the beam endpoint to the nearest occupied cell.
/// The additive floor keeps the result strictly positive.
double scan_likelihood(const statecore::Posture& pose, const statecore::RangeScan& scan,
                       const OccupancyGrid& map, const SensorModelConfig& cfg);

/// Same model evaluated against a prebuilt distance field (one field can
/// serve many pose hypotheses against the same map).
double scan_likelihood(const statecore::Posture& pose, const statecore::RangeScan& scan,
                       const DistanceField& field, double max_range,
                       const SensorModelConfig& cfg);

/// Ray-traced map update: cells crossed by a beam before its endpoint get
/// l_free, the endpoint cell gets l_occ when the beam hit something
/// (range < max_range). Cells outside the map are skipped.
void integrate_scan(OccupancyGrid& map, const statecore::Posture& pose,
                    const statecore::RangeScan& scan, const InverseSensorModel& ism = {});

/// Scan predicted from a pose against the map: first cell with
/// p(occupied) > 0.5 stops each beam. Unknown cells read as free.
statecore::RangeScan predict_scan(const OccupancyGrid& map, const statecore::Posture& pose,
                                  const std::vector<double>& beam_angles, double max_range);

}  // namespace hfslam::slamcore
