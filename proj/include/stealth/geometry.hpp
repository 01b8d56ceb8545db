#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stealth/common.hpp"

namespace stealth {

/// A point drawn uniformly on a sphere (or subsphere) of radius delta.
struct SphereSample {
  Vec x;
  double delta = 0.0;
  std::optional<std::vector<int>> support;  // sorted; absent = full space
  std::uint64_t seed = 0;
};

/// Uniform draw on the (n-1)-sphere of radius delta, by normalizing an
/// n-dimensional standard gaussian draw. Requires n >= 2, delta in (0, 1].
SphereSample sample_sphere(int n, double delta, std::uint64_t seed);

/// Uniform draw on the subsphere spanned by the given coordinates; all other
/// coordinates are exactly 0. Requires 2 <= |support| <= n, distinct indices.
SphereSample sample_subsphere(int n, std::vector<int> support, double delta,
                              std::uint64_t seed);

/// R = safety * max over vectors of ||v - center||; center defaults to 0.
double estimate_radius(std::span<const Vec> latents,
                       const std::optional<Vec>& center = std::nullopt,
                       double safety = 1.0);

/// Attack accuracy: ||x_prime - x.x|| / x.delta.
double alpha_of(const SphereSample& x, const Vec& x_prime);

/// Default trigger-search subspace: coordinates where phi_star > 0 (ReLU
/// latents have exact zeros that freeze gradients).
std::vector<int> positive_support(const Vec& phi_star);

}  // namespace stealth
