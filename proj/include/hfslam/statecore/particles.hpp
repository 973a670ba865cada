#pragma once

#include <span>
#include <vector>

#include "hfslam/statecore/random.hpp"

namespace hfslam::statecore {

/// Effective sample size 1 / sum(w^2) of a normalized weight vector.
double effective_sample_size(std::span<const double> weights);

/// Normalizes in place; returns the pre-normalization sum (0 if all zero,
/// in which case weights are left untouched).
double normalize_weights(std::span<double> weights);

/// Low-variance (systematic) resampling: one uniform draw, comb of N evenly
/// spaced pointers. Returns the selected source index per output slot.
std::vector<int> systematic_resample_indices(std::span<const double> weights, RandomSource& rs);

}  // namespace hfslam::statecore
