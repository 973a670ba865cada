#pragma once

/**
 * Discrete-time state-space models over finite state/observation alphabets,
 * with exact prediction, filtering, smoothing, and k-step prediction. State
 * spaces here are tiny by design: this module is the reference everything
 * larger is checked against.
 */

#include <iosfwd>
#include <span>
#include <vector>

#include "hfslam/statecore/errors.hpp"

namespace hfslam::ssm {

inline constexpr double kRowSumTolerance = 1e-12;

/// Finite-state model: one row-stochastic transition matrix per control
/// symbol, one emission matrix, one prior. Matrices are row-major,
/// transition[u][i * n_states + j] = p(x'=j | x=i, u).
struct DiscreteSsm {
  int n_states = 0;
  int n_obs = 0;
  std::vector<std::vector<double>> transition;  // [n_controls][n_states^2]
  std::vector<double> emission;                 // [n_states * n_obs]
  std::vector<double> prior;                    // [n_states]

  int n_controls() const { return static_cast<int>(transition.size()); }
  double trans(int u, int from, int to) const {
    return transition[u][from * n_states + to];
  }
  double emit(int state, int y) const { return emission[state * n_obs + y]; }

  /// Throws std::invalid_argument unless every row sums to 1 within
  /// kRowSumTolerance and all entries are non-negative.
  void validate() const;

  static DiscreteSsm load(std::istream& in);
  void save(std::ostream& out) const;
};

enum class Conditioning { predictive, filtered };

/// Distribution over states at step t, tagged with what it conditions on.
struct Belief {
  std::vector<double> probs;
  int t = 0;
  Conditioning conditioning = Conditioning::filtered;
};

/// Motion-model prediction: b'(x_t) = sum_{x_{t-1}} p(x_t | x_{t-1}, u) b(x_{t-1}).
Belief predict(const Belief& b, int u, const DiscreteSsm& m);

/// Measurement update: b(x_t) proportional to p(y | x_t) b'(x_t).
/// Throws ImpossibleObservation when the total likelihood is zero.
Belief update(const Belief& b_pred, int y, const DiscreteSsm& m);

/// Filter forward over the whole sequence; returns filtered beliefs for
/// t = 0..T where t=0 is the prior. ys[k] is observed at step k+1 under
/// control us[k].
std::vector<Belief> filter_sequence(const DiscreteSsm& m, std::span<const int> ys,
                                    std::span<const int> us);

/// Smoothing p(x_t | y_{1:T}) for t = 0..T via scaled forward-backward.
std::vector<std::vector<double>> forward_backward(const DiscreteSsm& m, std::span<const int> ys,
                                                  std::span<const int> us);

/// Applies predict once per control in us (k = us.size() >= 1 steps ahead).
Belief k_step_predict(const Belief& b, std::span<const int> us, const DiscreteSsm& m);

/// Half L1 distance between two distributions of equal length.
double total_variation(std::span<const double> a, std::span<const double> b);

}  // namespace hfslam::ssm
