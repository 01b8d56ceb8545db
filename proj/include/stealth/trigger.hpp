#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "stealth/attack.hpp"
#include "stealth/geometry.hpp"
#include "stealth/model.hpp"

namespace stealth {

struct TriggerSearchConfig {
  double lambda1 = 10.0;  // constraint-1 penalty weight
  double lambda2 = 10.0;  // constraint-2 penalty weight
  double p1 = 2.0;
  double p2 = 2.0;
  int max_iters = 100000;
  std::optional<double> step0;  // default: 0.01 * mean box width
  double step_decay = 1e-3;     // schedule step0 / (1 + step_decay * k)
  std::optional<double> alpha_target;  // early stop when alpha <= target
  std::uint64_t seed = 0;
  bool round_to_integers = false;  // post-hoc pixel quantization

  double resolve_step0(const Box& box) const;
};

struct TriggerLoss {
  double value = 0.0;
  Vec grad;
};

/// Penalized squared-distance loss of the trigger search and its gradient
/// (assembled through latent_vjp). u_star == nullptr means a plain attack
/// (the Phi(u*)/R term is replaced by 0).
TriggerLoss trigger_loss(const Network& net, const LatentSplit& split,
                         const Vec& u, const Vec* u_star,
                         const SphereSample& x, double R, double gamma,
                         double delta, const TriggerSearchConfig& cfg);

/// Coordinate-wise clamp onto the box.
Vec project_box(const Vec& u, const Box& box);

struct TriggerResult {
  Vec u_prime;
  SphereSample x;
  Vec x_prime;  // achieved latent displacement (Phi(u') - Phi(u*))/R
  double alpha = 0.0;
  bool feasible = false;
  std::vector<double> loss_trace;
  std::vector<double> best_alpha_trace;  // non-increasing by construction
};

/// Projected gradient descent on trigger_loss. Returns the best feasible
/// iterate by alpha, or the overall best iterate flagged infeasible.
TriggerResult search_trigger(const Network& net, const LatentSplit& split,
                             const SphereSample& x, const Vec* u_star,
                             double R, const AttackParams& params,
                             const TriggerSearchConfig& cfg);

/// Multi-restart: one search per candidate start, minimal alpha wins
/// (feasible results beat infeasible ones).
TriggerResult search_trigger_best(const Network& net, const LatentSplit& split,
                                  const SphereSample& x,
                                  std::span<const Vec> u_star_candidates,
                                  double R, const AttackParams& params,
                                  const TriggerSearchConfig& cfg);

nlohmann::json trigger_to_json(const TriggerResult& result,
                               const TriggerSearchConfig& cfg);
TriggerResult trigger_from_json(const nlohmann::json& j);

}  // namespace stealth
