#include "stealth/trigger.hpp"

#include <algorithm>
#include <cmath>

#include "stealth/rng.hpp"

namespace stealth {

double TriggerSearchConfig::resolve_step0(const Box& box) const {
  if (step0) {
    if (!(*step0 > 0.0)) throw DomainError("trigger search: step0 must be positive");
    return *step0;
  }
  const double mean_width = (box.upper - box.lower).mean();
  return 0.01 * (mean_width > 0.0 ? mean_width : 1.0);
}

TriggerLoss trigger_loss(const Network& net, const LatentSplit& split,
                         const Vec& u, const Vec* u_star,
                         const SphereSample& x, double R, double gamma,
                         double delta, const TriggerSearchConfig& cfg) {
  if (!(R > 0.0)) throw DomainError("trigger_loss: R must be positive");
  if (x.x.size() != split.latent_dim)
    throw ShapeError("trigger_loss: sphere sample dimension mismatch");
  if (u_star && u_star->size() != net.input_dim)
    throw ShapeError("trigger_loss: u_star dimension mismatch");

  const Vec phi_u = latent(net, split, u);
  Vec d = phi_u / R;
  if (u_star) d -= latent(net, split, *u_star) / R;

  const Vec r = d - x.x;
  const double r_norm = r.norm();
  const double d_norm = d.norm();

  TriggerLoss loss;
  loss.value = r.squaredNorm();

  // cotangent with respect to d; scaled by 1/R to pull back to Phi(u)
  Vec cot_d = 2.0 * r;

  const double g1_arg = gamma * d_norm - 1.0;
  if (g1_arg > 0.0 && cfg.lambda1 > 0.0) {
    loss.value += cfg.lambda1 * std::pow(g1_arg, cfg.p1);
    if (d_norm > 0.0)
      cot_d += (cfg.lambda1 * cfg.p1 * std::pow(g1_arg, cfg.p1 - 1.0) * gamma /
                d_norm) * d;
  }
  const double g2_arg = r_norm - delta;
  if (g2_arg > 0.0 && cfg.lambda2 > 0.0) {
    loss.value += cfg.lambda2 * std::pow(g2_arg, cfg.p2);
    if (r_norm > 0.0)
      cot_d += (cfg.lambda2 * cfg.p2 * std::pow(g2_arg, cfg.p2 - 1.0) / r_norm) * r;
  }

  loss.grad = latent_vjp(net, split, u, cot_d / R);
  return loss;
}

Vec project_box(const Vec& u, const Box& box) {
  Vec p(u.size());
  for (int i = 0; i < u.size(); ++i)
    p[i] = std::min(std::max(u[i], box.lower[i]), box.upper[i]);
  return p;
}

namespace {

struct Candidate {
  Vec u;
  Vec x_prime;
  double alpha = 0.0;
  bool feasible = false;
};

Candidate evaluate(const Network& net, const LatentSplit& split, const Vec& u,
                   const Vec* phi_star, const SphereSample& x, double R,
                   double gamma, double delta) {
  Candidate c;
  c.u = u;
  Vec d = latent(net, split, u) / R;
  if (phi_star) d -= *phi_star / R;
  c.x_prime = std::move(d);
  const double dist = (c.x_prime - x.x).norm();
  c.alpha = dist / x.delta;
  c.feasible = gamma * c.x_prime.norm() <= 1.0 && dist < delta;
  return c;
}

bool better(const Candidate& a, const Candidate& b) {
  if (a.feasible != b.feasible) return a.feasible;
  return a.alpha < b.alpha;
}

}  // namespace

TriggerResult search_trigger(const Network& net, const LatentSplit& split,
                             const SphereSample& x, const Vec* u_star,
                             double R, const AttackParams& params,
                             const TriggerSearchConfig& cfg) {
  split.validate(net);
  if (!(R > 0.0)) throw DomainError("search_trigger: R must be positive");
  if (cfg.max_iters <= 0) throw DomainError("search_trigger: max_iters must be positive");

  Vec u0;
  if (u_star) {
    if (u_star->size() != net.input_dim)
      throw ShapeError("search_trigger: u_star dimension mismatch");
    u0 = project_box(*u_star, net.input_box);
  } else {
    Rng rng(cfg.seed);
    u0 = Vec(net.input_dim);
    for (int i = 0; i < net.input_dim; ++i)
      u0[i] = rng.uniform(net.input_box.lower[i], net.input_box.upper[i]);
  }

  std::optional<Vec> phi_star_store;
  const Vec* phi_star = nullptr;
  if (u_star) {
    phi_star_store = latent(net, split, *u_star);
    phi_star = &*phi_star_store;
  }

  const double step0 = cfg.resolve_step0(net.input_box);
  Vec u = u0;
  Candidate best =
      evaluate(net, split, u, phi_star, x, R, params.gamma, params.delta);

  TriggerResult result;
  result.loss_trace.reserve(cfg.max_iters);
  result.best_alpha_trace.reserve(cfg.max_iters);

  for (int k = 0; k < cfg.max_iters; ++k) {
    TriggerLoss loss = trigger_loss(net, split, u, u_star, x, R, params.gamma,
                                    params.delta, cfg);
    if (!std::isfinite(loss.value))
      throw SearchError("search_trigger: non-finite loss at iteration " +
                        std::to_string(k) + " (step size too large?)");
    result.loss_trace.push_back(loss.value);

    const double step = step0 / (1.0 + cfg.step_decay * k);
    u = project_box(u - step * loss.grad, net.input_box);

    Candidate cand =
        evaluate(net, split, u, phi_star, x, R, params.gamma, params.delta);
    if (better(cand, best)) best = std::move(cand);
    result.best_alpha_trace.push_back(best.alpha);

    if (cfg.alpha_target && best.feasible && best.alpha <= *cfg.alpha_target)
      break;
  }

  if (cfg.round_to_integers) {
    Vec rounded(best.u.size());
    for (int i = 0; i < best.u.size(); ++i) rounded[i] = std::round(best.u[i]);
    rounded = project_box(rounded, net.input_box);
    Candidate quantized = evaluate(net, split, rounded, phi_star, x, R,
                                   params.gamma, params.delta);
    best = std::move(quantized);
  }

  result.u_prime = best.u;
  result.x = x;
  result.x_prime = best.x_prime;
  result.alpha = best.alpha;
  result.feasible = best.feasible;
  return result;
}

TriggerResult search_trigger_best(const Network& net, const LatentSplit& split,
                                  const SphereSample& x,
                                  std::span<const Vec> u_star_candidates,
                                  double R, const AttackParams& params,
                                  const TriggerSearchConfig& cfg) {
  if (u_star_candidates.empty())
    throw DomainError("search_trigger_best: no candidate targets");
  std::optional<TriggerResult> best;
  for (const Vec& u_star : u_star_candidates) {
    TriggerResult r = search_trigger(net, split, x, &u_star, R, params, cfg);
    const bool take = !best || (r.feasible && !best->feasible) ||
                      (r.feasible == best->feasible && r.alpha < best->alpha);
    if (take) best = std::move(r);
  }
  return *best;
}

nlohmann::json trigger_to_json(const TriggerResult& result,
                               const TriggerSearchConfig& cfg) {
  nlohmann::json j;
  j["u_prime"] = std::vector<double>(result.u_prime.data(),
                                     result.u_prime.data() + result.u_prime.size());
  nlohmann::json xj;
  xj["x"] = std::vector<double>(result.x.x.data(),
                                result.x.x.data() + result.x.x.size());
  xj["delta"] = result.x.delta;
  xj["seed"] = result.x.seed;
  if (result.x.support) xj["support"] = *result.x.support;
  j["sample"] = std::move(xj);
  j["x_prime"] = std::vector<double>(result.x_prime.data(),
                                     result.x_prime.data() + result.x_prime.size());
  j["alpha"] = result.alpha;
  j["feasible"] = result.feasible;
  j["loss_trace"] = result.loss_trace;
  j["config"] = {{"lambda1", cfg.lambda1},
                 {"lambda2", cfg.lambda2},
                 {"p1", cfg.p1},
                 {"p2", cfg.p2},
                 {"max_iters", cfg.max_iters},
                 {"step_decay", cfg.step_decay},
                 {"seed", cfg.seed},
                 {"round_to_integers", cfg.round_to_integers}};
  if (cfg.step0) j["config"]["step0"] = *cfg.step0;
  if (cfg.alpha_target) j["config"]["alpha_target"] = *cfg.alpha_target;
  return j;
}

TriggerResult trigger_from_json(const nlohmann::json& j) {
  TriggerResult result;
  try {
    const auto up = j.at("u_prime").get<std::vector<double>>();
    result.u_prime = Eigen::Map<const Vec>(up.data(), static_cast<int>(up.size()));
    const auto xv = j.at("sample").at("x").get<std::vector<double>>();
    result.x.x = Eigen::Map<const Vec>(xv.data(), static_cast<int>(xv.size()));
    result.x.delta = j.at("sample").at("delta").get<double>();
    result.x.seed = j.at("sample").at("seed").get<std::uint64_t>();
    if (j.at("sample").contains("support"))
      result.x.support = j.at("sample").at("support").get<std::vector<int>>();
    const auto xp = j.at("x_prime").get<std::vector<double>>();
    result.x_prime = Eigen::Map<const Vec>(xp.data(), static_cast<int>(xp.size()));
    result.alpha = j.at("alpha").get<double>();
    result.feasible = j.at("feasible").get<bool>();
    if (j.contains("loss_trace"))
      result.loss_trace = j.at("loss_trace").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("trigger: ") + e.what());
  }
  return result;
}

}  // namespace stealth
