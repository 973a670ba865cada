#include "hfslam/statecore/particles.hpp"

namespace hfslam::statecore {

double effective_sample_size(std::span<const double> weights) {
  double sq = 0.0;
  for (double w : weights) sq += w * w;
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

double normalize_weights(std::span<double> weights) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (sum > 0.0) {
    for (double& w : weights) w /= sum;
  }
  return sum;
}

std::vector<int> systematic_resample_indices(std::span<const double> weights, RandomSource& rs) {
  const int n = static_cast<int>(weights.size());
  std::vector<int> out(n);
  const double step = 1.0 / n;
  double pointer = rs.uniform01() * step;
  double cumulative = weights.empty() ? 0.0 : weights[0];
  int i = 0;
  for (int k = 0; k < n; ++k) {
    while (pointer > cumulative && i + 1 < n) {
      ++i;
      cumulative += weights[i];
    }
    out[k] = i;
    pointer += step;
  }
  return out;
}

}  // namespace hfslam::statecore
