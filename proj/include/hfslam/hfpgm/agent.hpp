#pragma once

/**
 * The integrated agent: FastSLAM's allocentric stream extended with the
 * egocentric stream and place-category formation.
 *
 * Per-step cycle (none of the category posterior, the position marginal, or
 * the posture belief feeds its own next value directly; everything routes
 * through the delayed copies and the prediction):
 *   1. speed from the displacement of the delayed position marginals
 *   2. posture prediction by motion composition
 *   3. correction by scan likelihood and by the previous step's posture
 *      prediction (kernel-density reweighting)
 *   4. egocentric encoding
 *   5. integration into the place model (CRP assignment)
 *   6. position marginal tagged by the MAP category
 *   7. delay-line shift
 *   8. next-step prediction build (posture, feature, scan, feature decode)
 *   9. map update
 *
 * With the egocentric stream disabled the cycle consumes the identical
 * random draw sequence and weight arithmetic as plain FastSLAM, so the
 * trajectories match bitwise under a shared seed.
 */

#include <optional>
#include <string>
#include <vector>

#include "hfslam/hfpgm/place_model.hpp"
#include "hfslam/slamcore/fastslam.hpp"
#include "hfslam/statecore/types.hpp"

namespace hfslam::hfpgm {

enum class BeliefStage { predictive, corrected };

/// Weighted posture particle snapshot.
struct PostureBelief {
  std::vector<statecore::Posture> poses;
  std::vector<double> weights;
  BeliefStage stage = BeliefStage::predictive;
};

enum class CodeStage { prediction_Z2, observation_Z3 };

/// Abstracted egocentric input. The abstraction is the identity at this
/// scale; the stage tag records which pathway the value represents.
struct EgocentricCode {
  statecore::EgocentricFeature feature;
  CodeStage stage = CodeStage::observation_Z3;
};

EgocentricCode encode_egocentric(const statecore::EgocentricFeature& y_per);

/// Delayed copies: category posterior and position marginal of the previous
/// step, plus the mean position from two steps back (for the speed
/// estimate).
struct DelayLine {
  std::vector<double> prev_category_posterior;
  std::vector<statecore::Posture> prev_positions;
  std::vector<double> prev_weights;
  double prev2_mean_x = 0.0;
  double prev2_mean_y = 0.0;
  int filled = 0;

  void shift(const std::vector<double>& category_posterior,
             const std::vector<statecore::Posture>& positions,
             const std::vector<double>& weights);
};

/// Translational speed from the one-step displacement of the delayed
/// position-marginal means; rotation passes through from the command.
/// Before two delay-line fills, falls back to commanded_v (error if absent).
statecore::Control estimate_speed(const DelayLine& d, double u_w,
                                  std::optional<double> commanded_v);

/// Next-step prediction bundle, built at the end of step t for use at t+1.
struct Prediction {
  PostureBelief g;                  // one-step propagated posture belief
  statecore::Posture g_mode;        // highest-weight pose of g
  FeaturePredictive l;              // expected egocentric feature
  statecore::RangeScan y_por_hat;   // decoded scan at g_mode on the best map
  statecore::EgocentricFeature y_per_hat;  // quantized expectation of l

  // frozen cluster predictive for scoring the next feature observation
  std::vector<double> mixture_log_weights;
  std::vector<std::vector<double>> mixture_feature_alphas;
  std::vector<std::vector<double>> mixture_landscape_alphas;
};

/// Log-likelihood of a feature under the prediction's frozen mixture.
double feature_log_likelihood(const Prediction& pred, const statecore::EgocentricFeature& z);

/// Kernel-density reweighting of posture particles by a predicted posture
/// belief (Gaussian kernel over positions, bandwidth h).
void weight_by_prediction(std::vector<slamcore::SlamParticle>& ps, const PostureBelief& g,
                          double bandwidth);

/// Correction stage in isolation: scan reweighting, optional prediction
/// reweighting, normalization and conditional resampling. Returns true if a
/// resample happened.
bool correct_posture(std::vector<slamcore::SlamParticle>& ps,
                     const std::optional<Prediction>& g_prev,
                     const statecore::RangeScan& y_por, const slamcore::SensorModelConfig& sensor,
                     double bandwidth, statecore::RandomSource& rs);

struct HfConfig {
  slamcore::FastSlamConfig slam;
  PlaceModelConfig place;
  double g_bandwidth = 1.0;  // kernel width for prediction reweighting
  // Ceiling on the internally estimated speed. The displacement estimate
  // feeds the next motion prediction; without a ceiling a single tracking
  // glitch can feed itself into runaway propagation.
  double max_estimated_speed = 1.0;
  bool lec_enabled = true;
};

struct StepResult {
  statecore::Posture pose_estimate;  // weighted mean after correction
  int map_category = 0;
  int cluster_count = 0;
  bool created_cluster = false;
  statecore::Control used_control;
  // Scores of the incoming observation under the previous step's
  // prediction; NaN on the first step.
  double ll_por = 0.0;
  double ll_per = 0.0;
  double ll_per_baseline = 0.0;
};

/// Dataflow edge of the update cycle, for structural checks and docs.
struct WiringEdge {
  std::string from;
  std::string to;
  bool crosses_time = false;
};

class HfAgent {
 public:
  HfAgent(const HfConfig& cfg, const statecore::GridSpec& map_spec,
          const statecore::Posture& start);

  StepResult step(const statecore::Observation& obs, statecore::RandomSource& rs);

  const std::vector<slamcore::SlamParticle>& particles() const { return particles_; }
  const PlaceModel& place_model() const { return place_model_; }
  const DelayLine& delay_line() const { return delay_; }
  const std::optional<Prediction>& prediction() const { return prediction_; }
  const HfConfig& config() const { return cfg_; }
  PostureBelief posture_belief(BeliefStage stage) const;

  /// The fixed dataflow of step(), one edge per dependency actually
  /// computed. No variable has a same-variable crossing edge.
  static std::vector<WiringEdge> wiring();

 private:
  HfConfig cfg_;
  std::vector<slamcore::SlamParticle> particles_;
  PlaceModel place_model_;
  DelayLine delay_;
  std::optional<Prediction> prediction_;
  std::vector<double> pooled_feature_counts_;
  std::vector<double> pooled_landscape_counts_;
  int steps_done_ = 0;

  Prediction build_prediction(const statecore::Control& u,
                              const statecore::Observation& obs) const;
};

}  // namespace hfslam::hfpgm
