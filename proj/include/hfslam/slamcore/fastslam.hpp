#pragma once

/**
 * Grid-based FastSLAM: a Rao-Blackwellized particle filter over the joint
 * posterior of trajectory and occupancy map. Each particle carries its own
 * pose hypothesis and map; the joint factorizes into a mapping term and a
 * self-localization term, handled by integrate_scan and the weighted
 * particle set respectively.
 *
 * Step order: sample motion, weight by the scan model, normalize, resample
 * when ESS drops below N/2 (strict), then integrate the scan into the maps
 * of the surviving particles only.
 */

#include <vector>

#include "hfslam/slamcore/occupancy_grid.hpp"
#include "hfslam/statecore/particles.hpp"
#include "hfslam/statecore/types.hpp"

namespace hfslam::slamcore {

struct SlamParticle {
  statecore::Posture pose;
  OccupancyGrid map;
  double weight = 1.0;
  std::vector<statecore::Posture> trajectory;  // filled when cfg.keep_trajectory
};

struct FastSlamConfig {
  int n_particles = 100;
  statecore::MotionNoise motion;
  SensorModelConfig sensor;
  InverseSensorModel inverse_sensor;
  bool keep_trajectory = false;
};

/// Equal-weight particles at a known start pose with blank maps.
std::vector<SlamParticle> init_particles(const FastSlamConfig& cfg,
                                         const statecore::GridSpec& map_spec,
                                         const statecore::Posture& start);

// The sub-steps are exposed so that the integrated agent can interleave its
// extra weighting factor while sharing the exact arithmetic and draw order.

/// Two noise draws per particle, in particle order.
void propagate_particles(std::vector<SlamParticle>& ps, const statecore::Control& u,
                         const statecore::MotionNoise& noise, statecore::RandomSource& rs);

/// weight *= scan likelihood against the particle's own map.
void weight_by_scan(std::vector<SlamParticle>& ps, const statecore::RangeScan& scan,
                    const SensorModelConfig& cfg);

/// Normalize; resample (one draw) only when ESS < N/2, strictly.
/// Returns true when a resample happened. Throws ImpossibleObservation if
/// every weight is zero.
bool normalize_and_maybe_resample(std::vector<SlamParticle>& ps, statecore::RandomSource& rs);

void integrate_scan_all(std::vector<SlamParticle>& ps, const statecore::RangeScan& scan,
                        const InverseSensorModel& ism);

/// One full FastSLAM update.
void fastslam_step(std::vector<SlamParticle>& ps, const statecore::Observation& obs,
                   const FastSlamConfig& cfg, statecore::RandomSource& rs);

/// Map of the highest-weight particle; ties break to the lowest index.
/// Throws std::invalid_argument on an empty set.
const OccupancyGrid& best_map(const std::vector<SlamParticle>& ps);

/// Weighted mean position with circular mean heading.
statecore::Posture mean_pose(const std::vector<SlamParticle>& ps);

}  // namespace hfslam::slamcore
