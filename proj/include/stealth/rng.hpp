#pragma once

#include <array>
#include <cstdint>

namespace stealth {

// Cross-platform reproducible generator: xoshiro256++ state seeded through
// splitmix64, gaussians via Box-Muller. std::normal_distribution is
// implementation-defined, so it cannot back the seed-determinism contract.
inline constexpr const char* kRngAlgorithm =
    "xoshiro256++ (splitmix64-seeded), gaussian: Box-Muller";

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform double in [0, 1).
  double next_double();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal draw.
  double next_gaussian();

 private:
  std::array<std::uint64_t, 4> state_{};
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

/// Decorrelated per-stream seed for worker/chunk partitioning.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace stealth
