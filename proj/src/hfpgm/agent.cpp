#include "hfslam/hfpgm/agent.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hfslam::hfpgm {

using slamcore::SlamParticle;
using statecore::Control;
using statecore::EgocentricFeature;
using statecore::Observation;
using statecore::Posture;
using statecore::RandomSource;
using statecore::RangeScan;
using statecore::SpeedSource;

EgocentricCode encode_egocentric(const EgocentricFeature& y_per) {
  return EgocentricCode{y_per, CodeStage::observation_Z3};
}

void DelayLine::shift(const std::vector<double>& category_posterior,
                      const std::vector<Posture>& positions,
                      const std::vector<double>& weights) {
  if (filled >= 1) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < prev_positions.size(); ++i) {
      mx += prev_weights[i] * prev_positions[i].x;
      my += prev_weights[i] * prev_positions[i].y;
    }
    prev2_mean_x = mx;
    prev2_mean_y = my;
  }
  prev_category_posterior = category_posterior;
  prev_positions = positions;
  prev_weights = weights;
  ++filled;
}

Control estimate_speed(const DelayLine& d, double u_w, std::optional<double> commanded_v) {
  Control c;
  c.w = u_w;
  if (d.filled < 2) {
    if (!commanded_v.has_value()) {
      throw std::invalid_argument("estimate_speed: warm-up requires a commanded speed");
    }
    c.v = *commanded_v;
    c.source_of_v = SpeedSource::commanded;
    return c;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < d.prev_positions.size(); ++i) {
    mx += d.prev_weights[i] * d.prev_positions[i].x;
    my += d.prev_weights[i] * d.prev_positions[i].y;
  }
  c.v = std::hypot(mx - d.prev2_mean_x, my - d.prev2_mean_y);
  c.source_of_v = SpeedSource::estimated;
  return c;
}

double feature_log_likelihood(const Prediction& pred, const EgocentricFeature& z) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(pred.mixture_log_weights.size());
  for (std::size_t k = 0; k < pred.mixture_log_weights.size(); ++k) {
    const auto& alphas = pred.mixture_feature_alphas[k];
    const auto& lands = pred.mixture_landscape_alphas[k];
    double land_total = 0.0;
    for (double v : lands) land_total += v;
    double t = pred.mixture_log_weights[k] + log_dirichlet_multinomial(z.object_histogram, alphas) +
               std::log(lands[z.landscape_code] / land_total);
    terms.push_back(t);
    best = std::max(best, t);
  }
  if (!std::isfinite(best)) return best;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - best);
  return best + std::log(s);
}

void weight_by_prediction(std::vector<SlamParticle>& ps, const PostureBelief& g,
                          double bandwidth) {
  const double inv_two_h_sq = 1.0 / (2.0 * bandwidth * bandwidth);
  for (auto& p : ps) {
    double density = 0.0;
    for (std::size_t j = 0; j < g.poses.size(); ++j) {
      const double dx = p.pose.x - g.poses[j].x;
      const double dy = p.pose.y - g.poses[j].y;
      density += g.weights[j] * std::exp(-(dx * dx + dy * dy) * inv_two_h_sq);
    }
    p.weight *= density;
  }
}

bool correct_posture(std::vector<SlamParticle>& ps, const std::optional<Prediction>& g_prev,
                     const RangeScan& y_por, const slamcore::SensorModelConfig& sensor,
                     double bandwidth, RandomSource& rs) {
  slamcore::weight_by_scan(ps, y_por, sensor);
  if (g_prev.has_value()) {
    weight_by_prediction(ps, g_prev->g, bandwidth);
  }
  return slamcore::normalize_and_maybe_resample(ps, rs);
}

HfAgent::HfAgent(const HfConfig& cfg, const statecore::GridSpec& map_spec, const Posture& start)
    : cfg_(cfg),
      particles_(slamcore::init_particles(cfg.slam, map_spec, start)),
      place_model_(cfg.place),
      pooled_feature_counts_(cfg.place.n_object_types, cfg.place.feature_pseudo),
      pooled_landscape_counts_(cfg.place.n_landscape_codes, cfg.place.landscape_pseudo) {}

PostureBelief HfAgent::posture_belief(BeliefStage stage) const {
  PostureBelief b;
  b.stage = stage;
  b.poses.reserve(particles_.size());
  b.weights.reserve(particles_.size());
  for (const auto& p : particles_) {
    b.poses.push_back(p.pose);
    b.weights.push_back(p.weight);
  }
  return b;
}

Prediction HfAgent::build_prediction(const Control& u, const Observation& obs) const {
  Prediction pred;
  // one-step deterministic propagation of the corrected set under u; the
  // spread of g is the posterior spread, not injected noise
  pred.g.stage = BeliefStage::predictive;
  pred.g.poses.reserve(particles_.size());
  pred.g.weights.reserve(particles_.size());
  std::size_t mode = 0;
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    pred.g.poses.push_back(pose_compose(particles_[i].pose, u));
    pred.g.weights.push_back(particles_[i].weight);
    if (particles_[i].weight > particles_[mode].weight) mode = i;
  }
  pred.g_mode = pred.g.poses[mode];

  double gx = 0.0, gy = 0.0;
  for (std::size_t i = 0; i < pred.g.poses.size(); ++i) {
    gx += pred.g.weights[i] * pred.g.poses[i].x;
    gy += pred.g.weights[i] * pred.g.poses[i].y;
  }
  pred.l = place_model_.complete_feature(gx, gy);

  pred.y_por_hat = slamcore::predict_scan(slamcore::best_map(particles_), pred.g_mode,
                                          obs.scan.angles, obs.scan.max_range);

  pred.y_per_hat.object_histogram.assign(cfg_.place.n_object_types, 0);
  for (int k = 0; k < cfg_.place.n_object_types; ++k) {
    pred.y_per_hat.object_histogram[k] =
        static_cast<int>(std::lround(pred.l.object_probs[k] * pred.l.expected_total));
  }
  int best_code = 0;
  for (int k = 1; k < cfg_.place.n_landscape_codes; ++k) {
    if (pred.l.landscape_probs[k] > pred.l.landscape_probs[best_code]) best_code = k;
  }
  pred.y_per_hat.landscape_code = best_code;

  // freeze the cluster predictives at the g mean for next-step scoring
  const auto& clusters = place_model_.clusters();
  std::vector<double> log_r(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    log_r[i] = std::log(static_cast<double>(clusters[i].n)) +
               place_model_.log_position_predictive(static_cast<int>(i), gx, gy);
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : log_r) mx = std::max(mx, v);
  double lse = 0.0;
  for (double v : log_r) lse += std::exp(v - mx);
  lse = mx + std::log(lse);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    pred.mixture_log_weights.push_back(log_r[i] - lse);
    std::vector<double> alphas(cfg_.place.n_object_types, cfg_.place.feature_pseudo);
    for (int k = 0; k < cfg_.place.n_object_types; ++k) alphas[k] += clusters[i].feature_counts[k];
    pred.mixture_feature_alphas.push_back(std::move(alphas));
    std::vector<double> lands(cfg_.place.n_landscape_codes, cfg_.place.landscape_pseudo);
    for (int k = 0; k < cfg_.place.n_landscape_codes; ++k) {
      lands[k] += clusters[i].landscape_counts[k];
    }
    pred.mixture_landscape_alphas.push_back(std::move(lands));
  }
  return pred;
}

StepResult HfAgent::step(const Observation& obs, RandomSource& rs) {
  StepResult res;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  res.ll_por = nan;
  res.ll_per = nan;
  res.ll_per_baseline = nan;

  // score the incoming observation against the standing prediction before
  // anything mutates
  if (prediction_.has_value()) {
    const slamcore::DistanceField field = slamcore::DistanceField::build(
        slamcore::best_map(particles_));
    res.ll_por = std::log(slamcore::scan_likelihood(prediction_->g_mode, obs.scan, field,
                                                    obs.scan.max_range, cfg_.slam.sensor));
    res.ll_per = feature_log_likelihood(*prediction_, obs.ego);

    double land_total = 0.0;
    for (double v : pooled_landscape_counts_) land_total += v;
    res.ll_per_baseline =
        log_dirichlet_multinomial(obs.ego.object_histogram, pooled_feature_counts_) +
        std::log(pooled_landscape_counts_[obs.ego.landscape_code] / land_total);
  }

  // (1) speed
  Control u;
  if (!cfg_.lec_enabled) {
    u = obs.control;  // reduction mode: the shared motion kernel verbatim
  } else {
    u = estimate_speed(delay_, obs.control.w, obs.control.v);
    if (u.v > cfg_.max_estimated_speed) u.v = cfg_.max_estimated_speed;
  }
  res.used_control = u;

  // (2) posture prediction
  slamcore::propagate_particles(particles_, u, cfg_.slam.motion, rs);

  // (3) correction; the prediction factor only participates when the
  // egocentric stream is live, and multiplies weights by a positive kernel
  // density, leaving the scan-only arithmetic untouched otherwise
  slamcore::weight_by_scan(particles_, obs.scan, cfg_.slam.sensor);
  if (cfg_.lec_enabled && prediction_.has_value()) {
    weight_by_prediction(particles_, prediction_->g, cfg_.g_bandwidth);
  }
  slamcore::normalize_and_maybe_resample(particles_, rs);
  res.pose_estimate = slamcore::mean_pose(particles_);

  // (4) egocentric encoding
  const EgocentricCode z = encode_egocentric(obs.ego);

  // (5) integration
  IntegrateOptions opts;
  if (!cfg_.lec_enabled) {
    opts.use_feature_term = false;
    opts.allow_new_cluster = place_model_.size() == 0;
  }
  const IntegrateResult integ =
      place_model_.integrate(res.pose_estimate.x, res.pose_estimate.y, z.feature, opts);
  res.map_category = integ.map_category;
  res.created_cluster = integ.created_cluster;
  res.cluster_count = place_model_.size();

  // (6) position marginal of the corrected belief, tagged by MAP category
  const PostureBelief r = posture_belief(BeliefStage::corrected);

  // (7) delay-line shift
  delay_.shift(integ.category_posterior, r.poses, r.weights);

  // (8) next-step prediction
  prediction_ = build_prediction(u, obs);

  // (9) map update into the surviving particles
  slamcore::integrate_scan_all(particles_, obs.scan, cfg_.slam.inverse_sensor);

  // pooled baseline counts grow only after scoring, so the baseline always
  // predicts forward like the model does
  for (int k = 0; k < cfg_.place.n_object_types; ++k) {
    pooled_feature_counts_[k] += obs.ego.object_histogram[k];
  }
  pooled_landscape_counts_[obs.ego.landscape_code] += 1.0;

  ++steps_done_;
  return res;
}

std::vector<WiringEdge> HfAgent::wiring() {
  return {
      {"r", "X_prime", true},   // delayed position marginal seeds the prediction point
      {"u_w", "u", false},      // rotation passes through
      {"r_prime", "u", false},  // speed from delayed marginal displacement
      {"X_prime", "X", false},  // motion composition
      {"u", "X", false},
      {"g", "X", true},         // previous prediction corrects the posture
      {"y_POR", "X", false},    // scan correction
      {"y_PER", "Z", false},    // egocentric encoding
      {"Z", "H", false},        // integration
      {"X", "H", false},
      {"H", "C", false},        // category posterior
      {"X", "r", false},        // position marginal
      {"C", "r", false},        // MAP tag
      {"C", "C_prime", true},   // delay line
      {"r", "r_prime", true},
      {"r", "g", true},         // prediction built from the fresh marginal
      {"u", "g", true},
      {"H", "l", false},        // completion from the place model
      {"g", "l", false},
      {"g", "y_POR_hat", false},
      {"l", "y_PER_hat", false},
  };
}

}  // namespace hfslam::hfpgm
