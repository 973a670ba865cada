#include "hfslam/eventqueue/queue.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hfslam/statecore/particles.hpp"

namespace hfslam::eventqueue {

using statecore::RandomSource;

void QueueConfig::validate() const {
  if (lag < 0) throw std::invalid_argument("QueueConfig: lag must be >= 0");
  if (lead < 1) throw std::invalid_argument("QueueConfig: lead must be >= 1");
}

namespace {

long ipow(long base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void renormalize(std::vector<double>& joint, const char* what) {
  double sum = 0.0;
  for (double v : joint) sum += v;
  if (sum <= 0.0) throw ImpossibleObservation(what);
  for (double& v : joint) v /= sum;
}

}  // namespace

ExactQueue ExactQueue::init(const ssm::DiscreteSsm& m, const QueueConfig& cfg) {
  cfg.validate();
  m.validate();
  const long full = ipow(m.n_states, cfg.window_size());
  if (full > kMaxExactJointSize) {
    throw CapacityError("exact queue joint would hold " + std::to_string(full) +
                        " entries, capacity is " + std::to_string(kMaxExactJointSize) +
                        "; use the particle backend");
  }

  ExactQueue q;
  q.cfg_ = cfg;
  q.n_states_ = m.n_states;
  q.t_ = 0;
  q.begin_ = 0;
  q.window_len_ = cfg.lead + 1;
  q.joint_ = m.prior;
  for (int k = 0; k < cfg.lead; ++k) {
    // extend the future side: new axis is contiguous
    std::vector<double> next(q.joint_.size() * m.n_states, 0.0);
    for (std::size_t idx = 0; idx < q.joint_.size(); ++idx) {
      const int last = static_cast<int>(idx % m.n_states);
      const double v = q.joint_[idx];
      if (v == 0.0) continue;
      for (int j = 0; j < m.n_states; ++j) {
        next[idx * m.n_states + j] = v * m.trans(0, last, j);
      }
    }
    q.joint_ = std::move(next);
  }
  return q;
}

void ExactQueue::step(int y, int u, const ssm::DiscreteSsm& m) {
  if (m.n_states != n_states_) throw std::invalid_argument("ExactQueue: model mismatch");
  const int n = n_states_;
  const int new_t = t_ + 1;
  const int new_begin = std::max(0, new_t - cfg_.lag);

  // (a) marginalize the oldest axis once the past side is full
  if (new_begin > begin_) {
    const long rest = static_cast<long>(joint_.size()) / n;
    std::vector<double> reduced(rest, 0.0);
    for (int s = 0; s < n; ++s) {
      const double* block = joint_.data() + static_cast<long>(s) * rest;
      for (long i = 0; i < rest; ++i) reduced[i] += block[i];
    }
    joint_ = std::move(reduced);
    begin_ = new_begin;
    --window_len_;
  }

  // (b) extend the future side by one transition
  {
    std::vector<double> next(joint_.size() * n, 0.0);
    for (std::size_t idx = 0; idx < joint_.size(); ++idx) {
      const int last = static_cast<int>(idx % n);
      const double v = joint_[idx];
      if (v == 0.0) continue;
      for (int j = 0; j < n; ++j) next[idx * n + j] = v * m.trans(u, last, j);
    }
    joint_ = std::move(next);
    ++window_len_;
  }

  // (c) reweight the current-time axis by the emission likelihood
  {
    const int axis = new_t - begin_;
    const long below = ipow(n, window_len_ - 1 - axis);  // stride of that axis
    for (std::size_t idx = 0; idx < joint_.size(); ++idx) {
      const int s = static_cast<int>((static_cast<long>(idx) / below) % n);
      joint_[idx] *= m.emit(s, y);
    }
  }

  // (d) renormalize
  renormalize(joint_, "queue step: zero total mass after reweighting");
  t_ = new_t;
}

ssm::Belief ExactQueue::marginal(int j) const {
  if (j < begin_ || j > window_end()) {
    throw std::out_of_range("queue marginal: time " + std::to_string(j) +
                            " outside window [" + std::to_string(begin_) + ", " +
                            std::to_string(window_end()) + "]");
  }
  const int axis = j - begin_;
  const long below = ipow(n_states_, window_len_ - 1 - axis);
  ssm::Belief b;
  b.t = j;
  b.conditioning = j <= t_ ? ssm::Conditioning::filtered : ssm::Conditioning::predictive;
  b.probs.assign(n_states_, 0.0);
  for (std::size_t idx = 0; idx < joint_.size(); ++idx) {
    const int s = static_cast<int>((static_cast<long>(idx) / below) % n_states_);
    b.probs[s] += joint_[idx];
  }
  return b;
}

ParticleKernels kernels_from(const ssm::DiscreteSsm& m) {
  ParticleKernels k;
  k.n_states = m.n_states;
  k.sample_prior = [&m](RandomSource& rs) {
    const double u = rs.uniform01();
    double acc = 0.0;
    for (int i = 0; i < m.n_states; ++i) {
      acc += m.prior[i];
      if (u < acc) return i;
    }
    return m.n_states - 1;
  };
  k.sample_transition = [&m](int x, int u_sym, RandomSource& rs) {
    const double u = rs.uniform01();
    double acc = 0.0;
    for (int j = 0; j < m.n_states; ++j) {
      acc += m.trans(u_sym, x, j);
      if (u < acc) return j;
    }
    return m.n_states - 1;
  };
  k.emission_likelihood = [&m](int x, int y) { return m.emit(x, y); };
  return k;
}

ParticleQueue ParticleQueue::init(const ParticleKernels& k, const QueueConfig& cfg,
                                  int n_particles, RandomSource& rs) {
  cfg.validate();
  if (n_particles <= 0) throw std::invalid_argument("ParticleQueue: n_particles must be > 0");
  ParticleQueue q;
  q.cfg_ = cfg;
  q.n_states_hint_ = k.n_states;
  q.t_ = 0;
  q.begin_ = 0;
  q.trajectories_.resize(n_particles);
  q.weights_.assign(n_particles, 1.0 / n_particles);
  for (auto& traj : q.trajectories_) {
    traj.reserve(cfg.window_size());
    traj.push_back(k.sample_prior(rs));
    for (int s = 0; s < cfg.lead; ++s) traj.push_back(k.sample_transition(traj.back(), 0, rs));
  }
  return q;
}

int ParticleQueue::window_end() const {
  return begin_ + static_cast<int>(trajectories_.empty() ? 0 : trajectories_[0].size()) - 1;
}

void ParticleQueue::step(int y, int u, const ParticleKernels& k, RandomSource& rs) {
  const int new_t = t_ + 1;
  const int new_begin = std::max(0, new_t - cfg_.lag);
  const bool drop_oldest = new_begin > begin_;
  const int n = n_particles();

  for (int i = 0; i < n; ++i) {
    auto& traj = trajectories_[i];
    if (drop_oldest) traj.erase(traj.begin());  // marginalization by forgetting
    traj.push_back(k.sample_transition(traj.back(), u, rs));
    const int slot = new_t - new_begin;
    weights_[i] *= k.emission_likelihood(traj[slot], y);
  }
  begin_ = new_begin;
  t_ = new_t;

  if (statecore::normalize_weights(weights_) <= 0.0) {
    throw ImpossibleObservation("particle queue: all weights zero");
  }
  if (statecore::effective_sample_size(weights_) < n / 2.0) {
    const auto picks = statecore::systematic_resample_indices(weights_, rs);
    std::vector<std::vector<int>> next(n);
    for (int i = 0; i < n; ++i) next[i] = trajectories_[picks[i]];
    trajectories_ = std::move(next);
    weights_.assign(n, 1.0 / n);
  }
}

ssm::Belief ParticleQueue::marginal(int j) const {
  if (j < begin_ || j > window_end()) {
    throw std::out_of_range("particle queue marginal: time outside window");
  }
  const int slot = j - begin_;
  ssm::Belief b;
  b.t = j;
  b.conditioning = j <= t_ ? ssm::Conditioning::filtered : ssm::Conditioning::predictive;
  b.probs.assign(n_states_hint_, 0.0);
  for (std::size_t i = 0; i < trajectories_.size(); ++i) {
    b.probs[trajectories_[i][slot]] += weights_[i];
  }
  return b;
}

double ParticleQueue::ess() const { return statecore::effective_sample_size(weights_); }

}  // namespace hfslam::eventqueue
