#include "hfslam/slamcore/fastslam.hpp"

#include <cmath>
#include <stdexcept>

#include "hfslam/statecore/errors.hpp"

namespace hfslam::slamcore {

using statecore::Control;
using statecore::MotionNoise;
using statecore::Observation;
using statecore::Posture;
using statecore::RandomSource;
using statecore::RangeScan;

std::vector<SlamParticle> init_particles(const FastSlamConfig& cfg,
                                         const statecore::GridSpec& map_spec,
                                         const Posture& start) {
  if (cfg.n_particles <= 0) throw std::invalid_argument("n_particles must be > 0");
  std::vector<SlamParticle> ps(cfg.n_particles);
  for (auto& p : ps) {
    p.pose = start;
    p.map = OccupancyGrid(map_spec);
    p.weight = 1.0 / cfg.n_particles;
    if (cfg.keep_trajectory) p.trajectory.push_back(start);
  }
  return ps;
}

void propagate_particles(std::vector<SlamParticle>& ps, const Control& u,
                         const MotionNoise& noise, RandomSource& rs) {
  for (auto& p : ps) {
    p.pose = pose_compose(p.pose, u, noise, rs);
  }
}

void weight_by_scan(std::vector<SlamParticle>& ps, const RangeScan& scan,
                    const SensorModelConfig& cfg) {
  for (auto& p : ps) {
    const DistanceField field = DistanceField::build(p.map);
    p.weight *= scan_likelihood(p.pose, scan, field, scan.max_range, cfg);
  }
}

bool normalize_and_maybe_resample(std::vector<SlamParticle>& ps, RandomSource& rs) {
  std::vector<double> w(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) w[i] = ps[i].weight;
  if (statecore::normalize_weights(w) <= 0.0) {
    throw ImpossibleObservation("fastslam: all particle weights zero");
  }
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i].weight = w[i];

  const double ess = statecore::effective_sample_size(w);
  if (!(ess < ps.size() / 2.0)) return false;

  const auto picks = statecore::systematic_resample_indices(w, rs);
  std::vector<SlamParticle> next;
  next.reserve(ps.size());
  for (int idx : picks) next.push_back(ps[idx]);
  for (auto& p : next) p.weight = 1.0 / ps.size();
  ps = std::move(next);
  return true;
}

void integrate_scan_all(std::vector<SlamParticle>& ps, const RangeScan& scan,
                        const InverseSensorModel& ism) {
  for (auto& p : ps) {
    integrate_scan(p.map, p.pose, scan, ism);
    if (!p.trajectory.empty()) p.trajectory.push_back(p.pose);
  }
}

void fastslam_step(std::vector<SlamParticle>& ps, const Observation& obs,
                   const FastSlamConfig& cfg, RandomSource& rs) {
  propagate_particles(ps, obs.control, cfg.motion, rs);
  weight_by_scan(ps, obs.scan, cfg.sensor);
  normalize_and_maybe_resample(ps, rs);
  integrate_scan_all(ps, obs.scan, cfg.inverse_sensor);
}

const OccupancyGrid& best_map(const std::vector<SlamParticle>& ps) {
  if (ps.empty()) throw std::invalid_argument("best_map: empty particle set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < ps.size(); ++i) {
    if (ps[i].weight > ps[best].weight) best = i;
  }
  return ps[best].map;
}

Posture mean_pose(const std::vector<SlamParticle>& ps) {
  if (ps.empty()) throw std::invalid_argument("mean_pose: empty particle set");
  double x = 0.0, y = 0.0, sin_sum = 0.0, cos_sum = 0.0;
  for (const auto& p : ps) {
    x += p.weight * p.pose.x;
    y += p.weight * p.pose.y;
    sin_sum += p.weight * std::sin(p.pose.theta);
    cos_sum += p.weight * std::cos(p.pose.theta);
  }
  return Posture{x, y, statecore::normalize_angle(std::atan2(sin_sum, cos_sum))};
}

}  // namespace hfslam::slamcore
