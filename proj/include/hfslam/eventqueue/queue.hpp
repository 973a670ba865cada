#pragma once

/**
 * Discrete-event queue: sequential estimation of the joint posterior over a
 * sliding window of past, present, and future states,
 *
 *   Queue(t) = p(x_{t-lag : t+lead} | y_{1:t})
 *
 * advanced by the recurrence: marginalize the oldest state out of
 * Queue(t-1), extend the future side by one transition, reweight the
 * current-time axis by the emission likelihood, renormalize. Window
 * marginals are then smoothed estimates for past offsets, the filter at
 * offset 0, and k-step predictions for future offsets.
 *
 * Two backends: a dense exact joint for DiscreteSsm (small state counts),
 * and a particle approximation over window-length trajectories for
 * arbitrary kernels.
 */

#include <functional>
#include <vector>

#include "hfslam/ssm/discrete.hpp"
#include "hfslam/statecore/random.hpp"

namespace hfslam::eventqueue {

/// Window shape. Defaults give the five-slot window t-2 .. t+2.
struct QueueConfig {
  int lag = 2;
  int lead = 2;

  void validate() const;  // lag >= 0, lead >= 1
  int window_size() const { return lag + lead + 1; }
};

/// Dense joints above this size are refused with CapacityError
/// (6 states x 5-slot window).
inline constexpr long kMaxExactJointSize = 7776;

/**
 * Exact backend. The joint is a dense rank-(window) tensor, newest axis
 * contiguous. Before warm-up completes (t < lag) the window is shorter on
 * the past side: it grows from the prior, so every marginal is exact at
 * every step, with no fictitious padding states.
 */
class ExactQueue {
 public:
  /// Queue at t=0: window covers 0..lead, prior propagated forward with no
  /// evidence (warm-up transitions use control symbol 0).
  static ExactQueue init(const ssm::DiscreteSsm& m, const QueueConfig& cfg);

  /// Advances to t+1 with observation y under control u.
  /// Throws ImpossibleObservation when the reweighted joint has zero mass.
  void step(int y, int u, const ssm::DiscreteSsm& m);

  /// Normalized marginal over states at absolute time j; j must lie inside
  /// the window. Tagged filtered for j <= t, predictive for j > t.
  ssm::Belief marginal(int j) const;

  int t() const { return t_; }
  int window_begin() const { return begin_; }
  int window_end() const { return begin_ + window_len_ - 1; }
  int window_len() const { return window_len_; }
  const std::vector<double>& joint() const { return joint_; }

 private:
  QueueConfig cfg_;
  int n_states_ = 0;
  int t_ = 0;
  int begin_ = 0;
  int window_len_ = 0;
  std::vector<double> joint_;
};

/// Model kernels for the particle backend; any generative model with a
/// samplable prior/transition and a pointwise emission likelihood fits.
struct ParticleKernels {
  int n_states = 0;  // marginal histogram size
  std::function<int(statecore::RandomSource&)> sample_prior;
  std::function<int(int x, int u, statecore::RandomSource&)> sample_transition;
  std::function<double(int x, int y)> emission_likelihood;
};

/// Kernels backed by a DiscreteSsm. The model is captured by reference and
/// must outlive the returned kernels.
ParticleKernels kernels_from(const ssm::DiscreteSsm& m);

/**
 * Particle backend: N weighted window-length state trajectories. Future
 * states are prior samples from the transition kernel (no future evidence
 * exists). Resampling copies whole trajectories, so past slots keep
 * fixed-lag smoother semantics at the usual degeneracy cost.
 */
class ParticleQueue {
 public:
  static ParticleQueue init(const ParticleKernels& k, const QueueConfig& cfg, int n_particles,
                            statecore::RandomSource& rs);

  /// Drop the oldest slot once the past side is full, sample the new future
  /// state per particle, reweight by the emission likelihood at the
  /// current-time slot, then systematic-resample when ESS < N/2.
  void step(int y, int u, const ParticleKernels& k, statecore::RandomSource& rs);

  ssm::Belief marginal(int j) const;

  int t() const { return t_; }
  int window_begin() const { return begin_; }
  int window_end() const;
  int n_particles() const { return static_cast<int>(weights_.size()); }
  double ess() const;

 private:
  QueueConfig cfg_;
  int n_states_hint_ = 0;
  int t_ = 0;
  int begin_ = 0;
  std::vector<std::vector<int>> trajectories_;
  std::vector<double> weights_;
};

}  // namespace hfslam::eventqueue
