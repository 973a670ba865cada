#include "hfslam/ssm/discrete.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "hfslam/statecore/textio.hpp"

namespace hfslam::ssm {

namespace {

void check_rows(const std::vector<double>& m, int rows, int cols, const std::string& what) {
  if (static_cast<int>(m.size()) != rows * cols) {
    throw std::invalid_argument(what + ": wrong size");
  }
  for (int i = 0; i < rows; ++i) {
    double sum = 0.0;
    for (int j = 0; j < cols; ++j) {
      const double v = m[i * cols + j];
      if (!(v >= 0.0)) throw std::invalid_argument(what + ": negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw std::invalid_argument(what + ": row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
    }
  }
}

void normalize_or_throw(std::vector<double>& v, const char* what) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (sum <= 0.0) throw ImpossibleObservation(what);
  for (double& x : v) x /= sum;
}

}  // namespace

void DiscreteSsm::validate() const {
  if (n_states <= 0 || n_obs <= 0 || transition.empty()) {
    throw std::invalid_argument("DiscreteSsm: empty model");
  }
  for (std::size_t u = 0; u < transition.size(); ++u) {
    check_rows(transition[u], n_states, n_states, "transition[" + std::to_string(u) + "]");
  }
  check_rows(emission, n_states, n_obs, "emission");
  check_rows(prior, 1, n_states, "prior");
}

Belief predict(const Belief& b, int u, const DiscreteSsm& m) {
  if (static_cast<int>(b.probs.size()) != m.n_states) {
    throw std::invalid_argument("predict: belief dimension mismatch");
  }
  if (u < 0 || u >= m.n_controls()) {
    throw std::invalid_argument("predict: unknown control symbol");
  }
  Belief out;
  out.t = b.t + 1;
  out.conditioning = Conditioning::predictive;
  out.probs.assign(m.n_states, 0.0);
  for (int i = 0; i < m.n_states; ++i) {
    const double bi = b.probs[i];
    if (bi == 0.0) continue;
    for (int j = 0; j < m.n_states; ++j) {
      out.probs[j] += m.trans(u, i, j) * bi;
    }
  }
  return out;
}

Belief update(const Belief& b_pred, int y, const DiscreteSsm& m) {
  if (static_cast<int>(b_pred.probs.size()) != m.n_states) {
    throw std::invalid_argument("update: belief dimension mismatch");
  }
  if (y < 0 || y >= m.n_obs) throw std::invalid_argument("update: unknown observation symbol");
  Belief out;
  out.t = b_pred.t;
  out.conditioning = Conditioning::filtered;
  out.probs.resize(m.n_states);
  for (int i = 0; i < m.n_states; ++i) out.probs[i] = m.emit(i, y) * b_pred.probs[i];
  normalize_or_throw(out.probs, "update: zero total likelihood");
  return out;
}

std::vector<Belief> filter_sequence(const DiscreteSsm& m, std::span<const int> ys,
                                    std::span<const int> us) {
  if (ys.size() != us.size()) throw std::invalid_argument("filter_sequence: ys/us mismatch");
  std::vector<Belief> out;
  out.reserve(ys.size() + 1);
  out.push_back(Belief{m.prior, 0, Conditioning::filtered});
  for (std::size_t k = 0; k < ys.size(); ++k) {
    out.push_back(update(predict(out.back(), us[k], m), ys[k], m));
  }
  return out;
}

std::vector<std::vector<double>> forward_backward(const DiscreteSsm& m, std::span<const int> ys,
                                                  std::span<const int> us) {
  if (ys.empty()) throw std::invalid_argument("forward_backward: T must be >= 1");
  if (ys.size() != us.size()) throw std::invalid_argument("forward_backward: ys/us mismatch");
  const int T = static_cast<int>(ys.size());
  const int n = m.n_states;

  // Scaled alphas: alpha[t] = p(x_t | y_{1:t}). The per-step scale factors
  // cancel in the smoothing ratio, so plain per-step normalization is exact.
  const std::vector<Belief> alpha = filter_sequence(m, ys, us);

  // beta[t][i] proportional to p(y_{t+1:T} | x_t = i), rescaled each step.
  std::vector<std::vector<double>> beta(T + 1, std::vector<double>(n, 1.0));
  for (int t = T - 1; t >= 0; --t) {
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        s += m.trans(us[t], i, j) * m.emit(j, ys[t]) * beta[t + 1][j];
      }
      beta[t][i] = s;
      scale += s;
    }
    if (scale <= 0.0) throw ImpossibleObservation("forward_backward: impossible sequence");
    for (int i = 0; i < n; ++i) beta[t][i] /= scale;
  }

  std::vector<std::vector<double>> smooth(T + 1, std::vector<double>(n));
  for (int t = 0; t <= T; ++t) {
    for (int i = 0; i < n; ++i) smooth[t][i] = alpha[t].probs[i] * beta[t][i];
    normalize_or_throw(smooth[t], "forward_backward: impossible sequence");
  }
  return smooth;
}

Belief k_step_predict(const Belief& b, std::span<const int> us, const DiscreteSsm& m) {
  if (us.empty()) throw std::invalid_argument("k_step_predict: k must be >= 1");
  Belief cur = b;
  for (int u : us) cur = predict(cur, u, m);
  return cur;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("total_variation: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

DiscreteSsm DiscreteSsm::load(std::istream& in) {
  statecore::RecordReader reader(in, "ssm");
  DiscreteSsm m;
  int n_controls = 0;
  statecore::Record r;
  while (reader.next(r)) {
    if (r.name == "dims") {
      m.n_states = static_cast<int>(r.get_int("states"));
      m.n_obs = static_cast<int>(r.get_int("obs"));
      n_controls = static_cast<int>(r.get_int("controls"));
      if (m.n_states <= 0 || m.n_obs <= 0 || n_controls <= 0) {
        throw ParseError("dims: all dimensions must be positive", r.line);
      }
      m.transition.assign(n_controls, std::vector<double>(m.n_states * m.n_states, 0.0));
      m.emission.assign(m.n_states * m.n_obs, 0.0);
      m.prior.assign(m.n_states, 0.0);
    } else if (r.name == "prior") {
      if (m.n_states == 0) throw ParseError("prior before dims", r.line);
      const auto p = r.get_doubles("p");
      if (static_cast<int>(p.size()) != m.n_states) throw ParseError("prior: wrong length", r.line);
      m.prior = p;
    } else if (r.name == "transition") {
      if (m.n_states == 0) throw ParseError("transition before dims", r.line);
      const int u = static_cast<int>(r.get_int("u"));
      const int row = static_cast<int>(r.get_int("row"));
      if (u < 0 || u >= n_controls || row < 0 || row >= m.n_states) {
        throw ParseError("transition: index out of range", r.line);
      }
      const auto p = r.get_doubles("p");
      if (static_cast<int>(p.size()) != m.n_states) {
        throw ParseError("transition: wrong row length", r.line);
      }
      for (int j = 0; j < m.n_states; ++j) m.transition[u][row * m.n_states + j] = p[j];
    } else if (r.name == "emission") {
      if (m.n_states == 0) throw ParseError("emission before dims", r.line);
      const int row = static_cast<int>(r.get_int("row"));
      if (row < 0 || row >= m.n_states) throw ParseError("emission: index out of range", r.line);
      const auto p = r.get_doubles("p");
      if (static_cast<int>(p.size()) != m.n_obs) {
        throw ParseError("emission: wrong row length", r.line);
      }
      for (int j = 0; j < m.n_obs; ++j) m.emission[row * m.n_obs + j] = p[j];
    } else {
      throw ParseError("unknown record '" + r.name + "'", r.line);
    }
  }
  if (m.n_states == 0) throw ParseError("missing dims record", 0);
  m.validate();
  return m;
}

void DiscreteSsm::save(std::ostream& out) const {
  statecore::RecordWriter w(out, "ssm");
  statecore::Record r;
  r.name = "dims";
  r.add("states", n_states).add("obs", n_obs).add("controls", n_controls());
  w.write(r);

  r = {};
  r.name = "prior";
  r.add_list("p", prior);
  w.write(r);

  for (int u = 0; u < n_controls(); ++u) {
    for (int i = 0; i < n_states; ++i) {
      r = {};
      r.name = "transition";
      r.add("u", u).add("row", i);
      std::vector<double> row(transition[u].begin() + i * n_states,
                              transition[u].begin() + (i + 1) * n_states);
      r.add_list("p", row);
      w.write(r);
    }
  }
  for (int i = 0; i < n_states; ++i) {
    r = {};
    r.name = "emission";
    r.add("row", i);
    std::vector<double> row(emission.begin() + i * n_obs, emission.begin() + (i + 1) * n_obs);
    r.add_list("p", row);
    w.write(r);
  }
}

}  // namespace hfslam::ssm
