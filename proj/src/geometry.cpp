#include "stealth/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "stealth/rng.hpp"

namespace stealth {

SphereSample sample_sphere(int n, double delta, std::uint64_t seed) {
  if (n < 2) throw DomainError("sample_sphere: n must be >= 2");
  if (!(delta > 0.0) || delta > 1.0)
    throw DomainError("sample_sphere: delta must be in (0, 1]");
  Rng rng(seed);
  Vec z(n);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      z[i] = rng.next_gaussian();
      norm_sq += z[i] * z[i];
    }
  } while (norm_sq == 0.0);
  SphereSample s;
  s.x = z * (delta / std::sqrt(norm_sq));
  s.delta = delta;
  s.seed = seed;
  return s;
}

SphereSample sample_subsphere(int n, std::vector<int> support, double delta,
                              std::uint64_t seed) {
  if (n < 2) throw DomainError("sample_subsphere: n must be >= 2");
  if (!(delta > 0.0) || delta > 1.0)
    throw DomainError("sample_subsphere: delta must be in (0, 1]");
  std::sort(support.begin(), support.end());
  if (support.size() < 2)
    throw DomainError("sample_subsphere: support must contain at least 2 indices");
  if (static_cast<int>(support.size()) > n)
    throw DomainError("sample_subsphere: support larger than dimension");
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0 || support[i] >= n)
      throw DomainError("sample_subsphere: support index out of range");
    if (i > 0 && support[i] == support[i - 1])
      throw DomainError("sample_subsphere: duplicate support index");
  }

  const int m = static_cast<int>(support.size());
  Rng rng(seed);
  Vec z(m);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (int i = 0; i < m; ++i) {
      z[i] = rng.next_gaussian();
      norm_sq += z[i] * z[i];
    }
  } while (norm_sq == 0.0);
  const double scale = delta / std::sqrt(norm_sq);

  SphereSample s;
  s.x = Vec::Zero(n);
  for (int i = 0; i < m; ++i) s.x[support[i]] = z[i] * scale;
  s.delta = delta;
  s.support = std::move(support);
  s.seed = seed;
  return s;
}

double estimate_radius(std::span<const Vec> latents,
                       const std::optional<Vec>& center, double safety) {
  if (latents.empty()) throw DomainError("estimate_radius: empty latent list");
  if (!(safety > 0.0)) throw DomainError("estimate_radius: safety must be positive");
  const int n = static_cast<int>(latents.front().size());
  if (center && center->size() != n)
    throw ShapeError("estimate_radius: center dimension mismatch");
  double max_sq = 0.0;
  for (const Vec& v : latents) {
    if (v.size() != n) throw ShapeError("estimate_radius: mixed dimensions");
    const double d_sq = center ? (v - *center).squaredNorm() : v.squaredNorm();
    max_sq = std::max(max_sq, d_sq);
  }
  return safety * std::sqrt(max_sq);
}

double alpha_of(const SphereSample& x, const Vec& x_prime) {
  if (x_prime.size() != x.x.size())
    throw ShapeError("alpha_of: dimension mismatch");
  if (!(x.delta > 0.0)) throw DomainError("alpha_of: delta must be positive");
  return (x_prime - x.x).norm() / x.delta;
}

std::vector<int> positive_support(const Vec& phi_star) {
  std::vector<int> support;
  for (int i = 0; i < phi_star.size(); ++i)
    if (phi_star[i] > 0.0) support.push_back(i);
  return support;
}

}  // namespace stealth
