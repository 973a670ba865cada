#include "hfslam/hfpgm/place_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "hfslam/statecore/log.hpp"
#include "hfslam/statecore/textio.hpp"

namespace hfslam::hfpgm {

using statecore::EgocentricFeature;
using statecore::RandomSource;

namespace {

double logsumexp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

int argmax(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// Marsaglia-Tsang gamma sampler (shape a, unit scale).
double sample_gamma(double a, RandomSource& rs) {
  if (a < 1.0) {
    const double u = rs.uniform01();
    return sample_gamma(a + 1.0, rs) * std::pow(u > 0.0 ? u : 0x1.0p-53, 1.0 / a);
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = rs.normal(0.0, 1.0);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rs.uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

void PlaceModelConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("PlaceModel: alpha must be > 0");
  if (!(position_prior.kappa > 0.0)) throw std::invalid_argument("PlaceModel: kappa must be > 0");
  if (!(position_prior.nu > 3.0)) {
    throw std::invalid_argument("PlaceModel: nu must exceed 3 (finite predictive covariance)");
  }
  const double det = position_prior.lambda_xx * position_prior.lambda_yy -
                     position_prior.lambda_xy * position_prior.lambda_xy;
  if (!(det > 0.0) || !(position_prior.lambda_xx > 0.0)) {
    throw std::invalid_argument("PlaceModel: lambda must be positive-definite");
  }
  if (!(feature_pseudo > 0.0) || !(landscape_pseudo > 0.0)) {
    throw std::invalid_argument("PlaceModel: pseudo-counts must be > 0");
  }
  if (n_object_types < 1 || n_landscape_codes < 1) {
    throw std::invalid_argument("PlaceModel: vocabulary sizes must be >= 1");
  }
}

PlaceModel::PlaceModel(const PlaceModelConfig& cfg) : cfg_(cfg) { cfg.validate(); }

PlaceModel::TParams PlaceModel::posterior_t(const PlaceCluster* c) const {
  const NiwParams& pr = cfg_.position_prior;
  const int n = c != nullptr ? c->n : 0;
  const double kappa_n = pr.kappa + n;
  const double nu_n = pr.nu + n;
  double mu_x = pr.mu_x;
  double mu_y = pr.mu_y;
  double l_xx = pr.lambda_xx;
  double l_xy = pr.lambda_xy;
  double l_yy = pr.lambda_yy;
  if (n > 0) {
    const double mx = c->sum_x / n;
    const double my = c->sum_y / n;
    mu_x = (pr.kappa * pr.mu_x + c->sum_x) / kappa_n;
    mu_y = (pr.kappa * pr.mu_y + c->sum_y) / kappa_n;
    // scatter around the sample mean
    const double s_xx = c->sq_xx - n * mx * mx;
    const double s_xy = c->sq_xy - n * mx * my;
    const double s_yy = c->sq_yy - n * my * my;
    const double shrink = pr.kappa * n / kappa_n;
    const double dx = mx - pr.mu_x;
    const double dy = my - pr.mu_y;
    l_xx += s_xx + shrink * dx * dx;
    l_xy += s_xy + shrink * dx * dy;
    l_yy += s_yy + shrink * dy * dy;
  }
  // Student-t: dof = nu_n - d + 1, scale = lambda_n (kappa_n + 1) / (kappa_n dof)
  const double dof = nu_n - 1.0;
  const double f = (kappa_n + 1.0) / (kappa_n * dof);
  TParams t{dof, mu_x, mu_y, l_xx * f, l_xy * f, l_yy * f};
  const double det = t.s_xx * t.s_yy - t.s_xy * t.s_xy;
  if (!(det > cfg_.jitter)) {
    t.s_xx += cfg_.jitter;
    t.s_yy += cfg_.jitter;
    jitter_events_ += 1;
    statecore::log_warn("place model: degenerate predictive covariance, added jitter");
  }
  return t;
}

namespace {

constexpr double kLogPi = 1.1447298858494002;

// Bivariate Student-t log density with dof nu, location mu, scale S:
//   lgamma((nu+2)/2) - lgamma(nu/2) - log(nu pi) - log|S|/2
//   - ((nu+2)/2) log(1 + m/nu)
double log_student_t_2d_impl(double dof, double mu_x, double mu_y, double s_xx, double s_xy,
                             double s_yy, double px, double py) {
  const double det = s_xx * s_yy - s_xy * s_xy;
  const double dx = px - mu_x;
  const double dy = py - mu_y;
  // Mahalanobis via explicit 2x2 inverse
  const double m = (dy * dy * s_xx - 2.0 * dx * dy * s_xy + dx * dx * s_yy) / det;
  return std::lgamma(0.5 * (dof + 2.0)) - std::lgamma(0.5 * dof) - std::log(dof) - kLogPi -
         0.5 * std::log(det) - 0.5 * (dof + 2.0) * std::log1p(m / dof);
}

}  // namespace

double PlaceModel::log_position_predictive(int cluster, double px, double py) const {
  const TParams t = posterior_t(&clusters_.at(cluster));
  return log_student_t_2d_impl(t.dof, t.mu_x, t.mu_y, t.s_xx, t.s_xy, t.s_yy, px, py);
}

double PlaceModel::log_position_prior_predictive(double px, double py) const {
  const TParams t = posterior_t(nullptr);
  return log_student_t_2d_impl(t.dof, t.mu_x, t.mu_y, t.s_xx, t.s_xy, t.s_yy, px, py);
}

double log_dirichlet_multinomial(const std::vector<int>& x, const std::vector<double>& alpha) {
  if (x.size() != alpha.size()) {
    throw std::invalid_argument("log_dirichlet_multinomial: length mismatch");
  }
  double a_total = 0.0;
  int m = 0;
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    a_total += alpha[k];
    m += x[k];
    acc += std::lgamma(alpha[k] + x[k]) - std::lgamma(alpha[k]);
  }
  return acc + std::lgamma(a_total) - std::lgamma(a_total + m);
}

double PlaceModel::log_feature_predictive(int cluster, const EgocentricFeature& z) const {
  if (static_cast<int>(z.object_histogram.size()) != cfg_.n_object_types) {
    throw std::invalid_argument("feature histogram has wrong arity");
  }
  if (z.landscape_code < 0 || z.landscape_code >= cfg_.n_landscape_codes) {
    throw std::invalid_argument("landscape code out of range");
  }
  std::vector<double> alpha(cfg_.n_object_types, cfg_.feature_pseudo);
  double land_num = cfg_.landscape_pseudo;
  double land_den = cfg_.landscape_pseudo * cfg_.n_landscape_codes;
  if (cluster >= 0) {
    const PlaceCluster& c = clusters_.at(cluster);
    for (int k = 0; k < cfg_.n_object_types; ++k) alpha[k] += c.feature_counts[k];
    land_num += c.landscape_counts[z.landscape_code];
    for (double v : c.landscape_counts) land_den += v;
  }
  return log_dirichlet_multinomial(z.object_histogram, alpha) + std::log(land_num / land_den);
}

std::vector<double> PlaceModel::assignment_posterior(double px, double py,
                                                     const EgocentricFeature& z,
                                                     const IntegrateOptions& opts) const {
  const int k = size();
  std::vector<double> log_scores;
  log_scores.reserve(k + 1);
  for (int i = 0; i < k; ++i) {
    double s = std::log(static_cast<double>(clusters_[i].n)) + log_position_predictive(i, px, py);
    if (opts.use_feature_term) s += log_feature_predictive(i, z);
    log_scores.push_back(s);
  }
  {
    double s = std::log(cfg_.alpha) + log_position_prior_predictive(px, py);
    if (opts.use_feature_term) s += log_feature_predictive(-1, z);
    if (!opts.allow_new_cluster && k > 0) s = -std::numeric_limits<double>::infinity();
    log_scores.push_back(s);
  }
  const double lse = logsumexp(log_scores);
  std::vector<double> probs(log_scores.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::exp(log_scores[i] - lse);
  return probs;
}

IntegrateResult PlaceModel::integrate(double px, double py, const EgocentricFeature& z,
                                      const IntegrateOptions& opts) {
  IntegrateResult res;
  res.category_posterior = assignment_posterior(px, py, z, opts);
  const int map = argmax(res.category_posterior);
  res.created_cluster = map == size();
  if (res.created_cluster) {
    PlaceCluster c;
    c.feature_counts.assign(cfg_.n_object_types, 0.0);
    c.landscape_counts.assign(cfg_.n_landscape_codes, 0.0);
    clusters_.push_back(std::move(c));
  }
  res.map_category = res.created_cluster ? size() - 1 : map;

  PlaceCluster& c = clusters_[res.map_category];
  c.n += 1;
  c.sum_x += px;
  c.sum_y += py;
  c.sq_xx += px * px;
  c.sq_xy += px * py;
  c.sq_yy += py * py;
  if (opts.use_feature_term) {
    for (int k = 0; k < cfg_.n_object_types; ++k) c.feature_counts[k] += z.object_histogram[k];
    c.landscape_counts[z.landscape_code] += 1.0;
    c.feature_total += z.total_count();
  }
  return res;
}

FeaturePredictive PlaceModel::complete_feature(double px, double py) const {
  if (clusters_.empty()) throw std::logic_error("complete_feature: empty place model");
  std::vector<double> log_r(size());
  for (int i = 0; i < size(); ++i) {
    log_r[i] = std::log(static_cast<double>(clusters_[i].n)) + log_position_predictive(i, px, py);
  }
  const double lse = logsumexp(log_r);
  FeaturePredictive out;
  out.object_probs.assign(cfg_.n_object_types, 0.0);
  out.landscape_probs.assign(cfg_.n_landscape_codes, 0.0);
  for (int i = 0; i < size(); ++i) {
    const double r = std::exp(log_r[i] - lse);
    const PlaceCluster& c = clusters_[i];
    double feat_den = cfg_.feature_pseudo * cfg_.n_object_types;
    for (double v : c.feature_counts) feat_den += v;
    for (int k = 0; k < cfg_.n_object_types; ++k) {
      out.object_probs[k] += r * (c.feature_counts[k] + cfg_.feature_pseudo) / feat_den;
    }
    double land_den = cfg_.landscape_pseudo * cfg_.n_landscape_codes;
    for (double v : c.landscape_counts) land_den += v;
    for (int k = 0; k < cfg_.n_landscape_codes; ++k) {
      out.landscape_probs[k] += r * (c.landscape_counts[k] + cfg_.landscape_pseudo) / land_den;
    }
    out.expected_total += r * (c.n > 0 ? c.feature_total / c.n : 0.0);
  }
  return out;
}

PositionPredictive PlaceModel::complete_position(const EgocentricFeature& z) const {
  if (clusters_.empty()) throw std::logic_error("complete_position: empty place model");
  std::vector<double> log_r(size());
  for (int i = 0; i < size(); ++i) {
    log_r[i] = std::log(static_cast<double>(clusters_[i].n)) + log_feature_predictive(i, z);
  }
  const double lse = logsumexp(log_r);
  PositionPredictive out;
  out.responsibilities.resize(size());
  std::vector<TParams> ts(size());
  for (int i = 0; i < size(); ++i) {
    out.responsibilities[i] = std::exp(log_r[i] - lse);
    ts[i] = posterior_t(&clusters_[i]);
    out.mean_x += out.responsibilities[i] * ts[i].mu_x;
    out.mean_y += out.responsibilities[i] * ts[i].mu_y;
  }
  for (int i = 0; i < size(); ++i) {
    const double r = out.responsibilities[i];
    const double cov_scale = ts[i].dof > 2.0 ? ts[i].dof / (ts[i].dof - 2.0) : 1.0;
    const double dx = ts[i].mu_x - out.mean_x;
    const double dy = ts[i].mu_y - out.mean_y;
    out.cov_xx += r * (cov_scale * ts[i].s_xx + dx * dx);
    out.cov_xy += r * (cov_scale * ts[i].s_xy + dx * dy);
    out.cov_yy += r * (cov_scale * ts[i].s_yy + dy * dy);
  }
  return out;
}

EgocentricFeature PlaceModel::sample_feature(double px, double py, RandomSource& rs) const {
  const FeaturePredictive mix = complete_feature(px, py);
  EgocentricFeature f;
  f.object_histogram.assign(cfg_.n_object_types, 0);
  const int draws = static_cast<int>(std::lround(mix.expected_total));
  for (int d = 0; d < draws; ++d) {
    double u = rs.uniform01();
    int pick = cfg_.n_object_types - 1;
    for (int k = 0; k < cfg_.n_object_types; ++k) {
      u -= mix.object_probs[k];
      if (u < 0.0) {
        pick = k;
        break;
      }
    }
    ++f.object_histogram[pick];
  }
  double u = rs.uniform01();
  f.landscape_code = cfg_.n_landscape_codes - 1;
  for (int k = 0; k < cfg_.n_landscape_codes; ++k) {
    u -= mix.landscape_probs[k];
    if (u < 0.0) {
      f.landscape_code = k;
      break;
    }
  }
  return f;
}

std::pair<double, double> PlaceModel::sample_position(const EgocentricFeature& z,
                                                      RandomSource& rs) const {
  const PositionPredictive mix = complete_position(z);
  // pick a cluster, then draw from its Student-t via normal / sqrt(chi2/dof)
  double u = rs.uniform01();
  int pick = size() - 1;
  for (int i = 0; i < size(); ++i) {
    u -= mix.responsibilities[i];
    if (u < 0.0) {
      pick = i;
      break;
    }
  }
  const TParams t = posterior_t(&clusters_[pick]);
  const double chi2 = 2.0 * sample_gamma(0.5 * t.dof, rs);
  const double scale = std::sqrt(t.dof / std::max(chi2, 1e-300));
  const double z1 = rs.normal(0.0, 1.0);
  const double z2 = rs.normal(0.0, 1.0);
  // Cholesky of the 2x2 scale matrix
  const double l11 = std::sqrt(t.s_xx);
  const double l21 = t.s_xy / l11;
  const double l22 = std::sqrt(std::max(t.s_yy - l21 * l21, 1e-300));
  return {t.mu_x + scale * (l11 * z1), t.mu_y + scale * (l21 * z1 + l22 * z2)};
}

void PlaceModel::save(std::ostream& out) const {
  statecore::RecordWriter w(out, "placemodel");
  statecore::Record r;
  r.name = "config";
  r.add("alpha", cfg_.alpha)
      .add("mu_x", cfg_.position_prior.mu_x)
      .add("mu_y", cfg_.position_prior.mu_y)
      .add("kappa", cfg_.position_prior.kappa)
      .add("nu", cfg_.position_prior.nu)
      .add("lambda_xx", cfg_.position_prior.lambda_xx)
      .add("lambda_xy", cfg_.position_prior.lambda_xy)
      .add("lambda_yy", cfg_.position_prior.lambda_yy)
      .add("feature_pseudo", cfg_.feature_pseudo)
      .add("landscape_pseudo", cfg_.landscape_pseudo)
      .add("object_types", cfg_.n_object_types)
      .add("landscape_codes", cfg_.n_landscape_codes);
  w.write(r);
  for (int i = 0; i < size(); ++i) {
    const PlaceCluster& c = clusters_[i];
    r = {};
    r.name = "cluster";
    r.add("id", i)
        .add("n", c.n)
        .add("sum_x", c.sum_x)
        .add("sum_y", c.sum_y)
        .add("sq_xx", c.sq_xx)
        .add("sq_xy", c.sq_xy)
        .add("sq_yy", c.sq_yy)
        .add("feature_total", c.feature_total)
        .add_list("feature_counts", c.feature_counts)
        .add_list("landscape_counts", c.landscape_counts);
    w.write(r);
  }
}

PlaceModel PlaceModel::load(std::istream& in) {
  statecore::RecordReader reader(in, "placemodel");
  PlaceModelConfig cfg;
  std::vector<PlaceCluster> clusters;
  statecore::Record r;
  bool have_cfg = false;
  while (reader.next(r)) {
    if (r.name == "config") {
      cfg.alpha = r.get_double("alpha");
      cfg.position_prior.mu_x = r.get_double("mu_x");
      cfg.position_prior.mu_y = r.get_double("mu_y");
      cfg.position_prior.kappa = r.get_double("kappa");
      cfg.position_prior.nu = r.get_double("nu");
      cfg.position_prior.lambda_xx = r.get_double("lambda_xx");
      cfg.position_prior.lambda_xy = r.get_double("lambda_xy");
      cfg.position_prior.lambda_yy = r.get_double("lambda_yy");
      cfg.feature_pseudo = r.get_double("feature_pseudo");
      cfg.landscape_pseudo = r.get_double("landscape_pseudo");
      cfg.n_object_types = static_cast<int>(r.get_int("object_types"));
      cfg.n_landscape_codes = static_cast<int>(r.get_int("landscape_codes"));
      have_cfg = true;
    } else if (r.name == "cluster") {
      PlaceCluster c;
      c.n = static_cast<int>(r.get_int("n"));
      c.sum_x = r.get_double("sum_x");
      c.sum_y = r.get_double("sum_y");
      c.sq_xx = r.get_double("sq_xx");
      c.sq_xy = r.get_double("sq_xy");
      c.sq_yy = r.get_double("sq_yy");
      c.feature_total = r.get_double("feature_total");
      c.feature_counts = r.get_doubles("feature_counts");
      c.landscape_counts = r.get_doubles("landscape_counts");
      clusters.push_back(std::move(c));
    } else {
      throw ParseError("unknown placemodel record '" + r.name + "'", r.line);
    }
  }
  if (!have_cfg) throw ParseError("placemodel missing config record", 0);
  PlaceModel m(cfg);
  m.clusters_ = std::move(clusters);
  return m;
}

}  // namespace hfslam::hfpgm
