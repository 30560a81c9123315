#pragma once

#include <cstdint>
#include <random>

namespace incomelab {

/// splitmix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based seed for replica `index` of a run seeded with `seed`.
/// Replicas get independent streams no matter how they are scheduled.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Per-replica random stream: engine plus the normal sampler state.
class ReplicaStream {
 public:
  explicit ReplicaStream(std::uint64_t seed) : engine_(seed) {}
  ReplicaStream(std::uint64_t seed, std::uint64_t replica)
      : engine_(derive_seed(seed, replica)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace incomelab
