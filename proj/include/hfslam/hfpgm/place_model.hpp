#pragma once

/**
 * Dirichlet-process mixture over (position, egocentric feature): the place
 * category store. Positions follow a Gaussian with a normal-inverse-Wishart
 * prior; object histograms a Dirichlet-multinomial; landscape codes a
 * Dirichlet-categorical.
 *
 * Assignment is sequential MAP (one CRP pass per step, no batch Gibbs
 * re-estimation): an observation either joins the best existing cluster or
 * opens a new one. Opening a cluster is the pattern-separation act; the
 * cross-modal predictive (pattern_complete) is the completion act. The
 * cluster list is append-only within a run.
 */

#include <iosfwd>
#include <optional>
#include <vector>

#include "hfslam/statecore/random.hpp"
#include "hfslam/statecore/types.hpp"

namespace hfslam::hfpgm {

/// Normal-inverse-Wishart hyperparameters for the 2-D position model.
/// lambda is the symmetric scale matrix stored as (xx, xy, yy). The
/// defaults keep cluster spread near room scale (about 1.2 m standard
/// deviation) with a weak mean: nu well above the dimension stops a
/// cluster that straddles rooms from inflating its covariance until it
/// swallows the map.
struct NiwParams {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double kappa = 0.05;
  double nu = 20.0;
  double lambda_xx = 25.0;
  double lambda_xy = 0.0;
  double lambda_yy = 25.0;
};

struct PlaceModelConfig {
  double alpha = 1.0;  // DP concentration
  NiwParams position_prior;
  double feature_pseudo = 0.5;    // Dirichlet pseudo-count per object type
  double landscape_pseudo = 0.5;  // per landscape code
  int n_object_types = 1;
  int n_landscape_codes = 1;
  double jitter = 1e-9;

  void validate() const;
};

struct PlaceCluster {
  int n = 0;                        // member count
  double sum_x = 0.0, sum_y = 0.0;  // position sufficient statistics
  double sq_xx = 0.0, sq_xy = 0.0, sq_yy = 0.0;
  std::vector<double> feature_counts;    // per object type
  std::vector<double> landscape_counts;  // per landscape code
  double feature_total = 0.0;            // running histogram mass, for expected counts

  double mean_x() const { return n > 0 ? sum_x / n : 0.0; }
  double mean_y() const { return n > 0 ? sum_y / n : 0.0; }
};

struct IntegrateOptions {
  bool use_feature_term = true;  // off: position-only scoring and no count updates
  bool allow_new_cluster = true;
};

struct IntegrateResult {
  std::vector<double> category_posterior;  // over clusters, last slot = new
  int map_category = 0;
  bool created_cluster = false;
};

/// Expected feature under a (mixture of) cluster predictive(s).
struct FeaturePredictive {
  std::vector<double> object_probs;
  std::vector<double> landscape_probs;
  double expected_total = 0.0;
};

struct PositionPredictive {
  double mean_x = 0.0, mean_y = 0.0;
  double cov_xx = 0.0, cov_xy = 0.0, cov_yy = 0.0;
  std::vector<double> responsibilities;
};

class PlaceModel {
 public:
  PlaceModel() = default;
  explicit PlaceModel(const PlaceModelConfig& cfg);

  const PlaceModelConfig& config() const { return cfg_; }
  const std::vector<PlaceCluster>& clusters() const { return clusters_; }
  int size() const { return static_cast<int>(clusters_.size()); }
  int jitter_events() const { return jitter_events_; }

  /// CRP scores for (pos, feature): n_k x position-predictive x
  /// feature-predictive per existing cluster, alpha x prior predictives for
  /// the new-cluster slot. Returns the normalized posterior without
  /// mutating the model.
  std::vector<double> assignment_posterior(double px, double py,
                                           const statecore::EgocentricFeature& z,
                                           const IntegrateOptions& opts = {}) const;

  /// Scores, picks the MAP slot, folds the observation's sufficient
  /// statistics into it (creating the cluster when MAP is the new slot).
  IntegrateResult integrate(double px, double py, const statecore::EgocentricFeature& z,
                            const IntegrateOptions& opts = {});

  /// Completion, position -> feature: mixture over clusters weighted by the
  /// position likelihood. Throws std::logic_error on an empty model.
  FeaturePredictive complete_feature(double px, double py) const;

  /// Completion, feature -> position.
  PositionPredictive complete_position(const statecore::EgocentricFeature& z) const;

  /// Sampling variants of the two completions.
  statecore::EgocentricFeature sample_feature(double px, double py,
                                              statecore::RandomSource& rs) const;
  std::pair<double, double> sample_position(const statecore::EgocentricFeature& z,
                                            statecore::RandomSource& rs) const;

  /// Log posterior-predictive density of a position under one cluster
  /// (multivariate Student-t from the NIW posterior).
  double log_position_predictive(int cluster, double px, double py) const;
  /// Same under the bare prior (the new-cluster slot).
  double log_position_prior_predictive(double px, double py) const;

  /// Log Dirichlet-multinomial + Dirichlet-categorical predictive of a
  /// feature under one cluster (or the prior for cluster = -1).
  double log_feature_predictive(int cluster, const statecore::EgocentricFeature& z) const;

  void save(std::ostream& out) const;
  static PlaceModel load(std::istream& in);

 private:
  PlaceModelConfig cfg_;
  std::vector<PlaceCluster> clusters_;
  mutable int jitter_events_ = 0;

  struct TParams {
    double dof, mu_x, mu_y, s_xx, s_xy, s_yy;
  };
  TParams posterior_t(const PlaceCluster* c) const;  // nullptr = prior
};

/// Log Dirichlet-multinomial likelihood of integer counts x under
/// pseudo-counts alpha (exchangeable-sequence convention, no multinomial
/// coefficient).
double log_dirichlet_multinomial(const std::vector<int>& x, const std::vector<double>& alpha);

}  // namespace hfslam::hfpgm
