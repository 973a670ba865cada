#pragma once

// Test-side oracles, deliberately independent of the library's inference
// paths: brute-force trajectory enumeration for posteriors, explicit matrix
// products for prediction, and a direct construction of the windowed joint.
// Expected values asserted in the test files were computed with these.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "hfslam/ssm/discrete.hpp"
#include "hfslam/statecore/random.hpp"

namespace oracles {

using hfslam::ssm::DiscreteSsm;

// All state trajectories x_0..x_T weighted by prior * transitions * emissions;
// marginalize by summation. Exponential in T: keep T small.
struct EnumerationResult {
  std::vector<std::vector<double>> filtering;  // [t][state], t = 0..T
  std::vector<std::vector<double>> smoothing;  // [t][state], given y_{1:T}
};

inline EnumerationResult enumerate_posteriors(const DiscreteSsm& m, const std::vector<int>& ys,
                                              const std::vector<int>& us) {
  const int T = static_cast<int>(ys.size());
  const int n = m.n_states;
  EnumerationResult out;
  out.filtering.assign(T + 1, std::vector<double>(n, 0.0));
  out.smoothing.assign(T + 1, std::vector<double>(n, 0.0));

  // filtering at time t needs its own enumeration over y_{1:t}
  for (int horizon = 0; horizon <= T; ++horizon) {
    std::vector<int> traj(horizon + 1, 0);
    std::vector<double> marginal(n, 0.0);
    double total = 0.0;
    while (true) {
      double w = m.prior[traj[0]];
      for (int t = 1; t <= horizon; ++t) {
        w *= m.trans(us[t - 1], traj[t - 1], traj[t]) * m.emit(traj[t], ys[t - 1]);
      }
      marginal[traj[horizon]] += w;
      total += w;
      int pos = horizon;
      while (pos >= 0 && ++traj[pos] == n) traj[pos--] = 0;
      if (pos < 0) break;
    }
    if (total <= 0.0) throw std::runtime_error("enumeration: impossible sequence");
    for (int s = 0; s < n; ++s) out.filtering[horizon][s] = marginal[s] / total;
  }

  // smoothing: single enumeration over the full horizon, marginal per t
  {
    std::vector<int> traj(T + 1, 0);
    std::vector<std::vector<double>> marginal(T + 1, std::vector<double>(n, 0.0));
    double total = 0.0;
    while (true) {
      double w = m.prior[traj[0]];
      for (int t = 1; t <= T; ++t) {
        w *= m.trans(us[t - 1], traj[t - 1], traj[t]) * m.emit(traj[t], ys[t - 1]);
      }
      for (int t = 0; t <= T; ++t) marginal[t][traj[t]] += w;
      total += w;
      int pos = T;
      while (pos >= 0 && ++traj[pos] == n) traj[pos--] = 0;
      if (pos < 0) break;
    }
    for (int t = 0; t <= T; ++t) {
      for (int s = 0; s < n; ++s) out.smoothing[t][s] = marginal[t][s] / total;
    }
  }
  return out;
}

// b * T^k by explicit repeated matrix-vector products.
inline std::vector<double> matrix_power_predict(const DiscreteSsm& m, std::vector<double> b,
                                                int u, int k) {
  for (int step = 0; step < k; ++step) {
    std::vector<double> next(m.n_states, 0.0);
    for (int i = 0; i < m.n_states; ++i) {
      for (int j = 0; j < m.n_states; ++j) next[j] += b[i] * m.trans(u, i, j);
    }
    b = std::move(next);
  }
  return b;
}

// Direct construction of p(x_{t-lag..t+lead} | y_{1:t}): filtered belief at
// the window start, explicit transition/emission factors across the window,
// one global normalization. Uses the library filter only up to the window
// start, then its own products.
inline std::vector<double> windowed_joint_direct(const DiscreteSsm& m, const std::vector<int>& ys,
                                                 const std::vector<int>& us, int t, int lag,
                                                 int lead) {
  const int n = m.n_states;
  const int begin = std::max(0, t - lag);
  const int window = t + lead - begin + 1;

  const auto filtered = hfslam::ssm::filter_sequence(
      m, std::span<const int>(ys.data(), t), std::span<const int>(us.data(), t));

  std::vector<double> joint;
  long size = 1;
  for (int i = 0; i < window; ++i) size *= n;
  joint.assign(size, 0.0);

  std::vector<int> states(window, 0);
  for (long idx = 0; idx < size; ++idx) {
    long rest = idx;
    for (int i = window - 1; i >= 0; --i) {
      states[i] = static_cast<int>(rest % n);
      rest /= n;
    }
    // start from the filtered marginal at `begin`...
    double w = filtered[begin].probs[states[0]];
    for (int i = 1; i < window; ++i) {
      const int time = begin + i;
      w *= m.trans(us[time - 1], states[i - 1], states[i]);
      // ...multiplying in the evidence strictly inside (begin, t]
      if (time <= t) w *= m.emit(states[i], ys[time - 1]);
    }
    joint[idx] = w;
  }
  double total = 0.0;
  for (double v : joint) total += v;
  for (double& v : joint) v /= total;
  return joint;
}

// Deterministically seeded random models for property sweeps.
inline DiscreteSsm random_model(hfslam::statecore::RandomSource& rs, int n_states, int n_obs,
                                int n_controls = 1) {
  auto random_row = [&rs](int len) {
    std::vector<double> row(len);
    double sum = 0.0;
    for (double& v : row) {
      v = 0.05 + rs.uniform01();
      sum += v;
    }
    for (double& v : row) v /= sum;
    return row;
  };
  DiscreteSsm m;
  m.n_states = n_states;
  m.n_obs = n_obs;
  m.prior = random_row(n_states);
  m.transition.resize(n_controls);
  for (int u = 0; u < n_controls; ++u) {
    m.transition[u].clear();
    for (int i = 0; i < n_states; ++i) {
      const auto row = random_row(n_states);
      m.transition[u].insert(m.transition[u].end(), row.begin(), row.end());
    }
  }
  for (int i = 0; i < n_states; ++i) {
    const auto row = random_row(n_obs);
    m.emission.insert(m.emission.end(), row.begin(), row.end());
  }
  return m;
}

// Observation/control sequence sampled from the model.
inline void sample_sequence(const DiscreteSsm& m, hfslam::statecore::RandomSource& rs, int steps,
                            std::vector<int>& ys, std::vector<int>& us, int n_controls = 1) {
  auto pick = [&rs](const double* row, int len) {
    double u = rs.uniform01();
    for (int i = 0; i < len; ++i) {
      u -= row[i];
      if (u < 0.0) return i;
    }
    return len - 1;
  };
  ys.clear();
  us.clear();
  int x = pick(m.prior.data(), m.n_states);
  for (int t = 0; t < steps; ++t) {
    const int u = n_controls > 1 ? static_cast<int>(rs.uniform_int(n_controls)) : 0;
    x = pick(m.transition[u].data() + x * m.n_states, m.n_states);
    ys.push_back(pick(m.emission.data() + x * m.n_obs, m.n_obs));
    us.push_back(u);
  }
}

}  // namespace oracles
