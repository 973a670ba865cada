#pragma once

#include <cstdint>
#include <random>

namespace hfslam::statecore {

/**
 * Deterministic random source.
 *
 * Contract: identical (seed, stream_id, call sequence) yields identical
 * draws, across platforms and standard-library implementations. The engine
 * is std::mt19937_64 (bit-exact by the standard); the uniform/normal/integer
 * transforms are implemented here rather than via std:: distributions, whose
 * output is implementation-defined.
 *
 * A source is single-owner. Parallel consumers must derive distinct streams
 * with stream(id); streams are statistically independent for distinct ids.
 */
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream_id = 0);

  /// Uniform double in [0, 1), 53 random bits.
  double uniform01();

  /// Gaussian draw, Box-Muller with spare caching.
  double normal(double mean, double sigma);

  /// Uniform integer in [0, n), unbiased (rejection). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Raw 64-bit draw from the engine.
  std::uint64_t next_u64();

  /// Derived source with the same seed and a different stream id.
  RandomSource stream(std::uint64_t stream_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hfslam::statecore
