#pragma once

#include <cstdint>
#include <random>

namespace rotodrum {

/// Seedable, splittable generator. Every stochastic routine takes one of these
/// explicitly; split() derives statistically independent child streams so
/// parallel replicas are reproducible regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Child stream keyed by `stream`; the parent state is not advanced.
  Rng split(std::uint64_t stream) const;

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rotodrum
