#include "stealth/attack.hpp"

#include <cmath>

namespace stealth {

namespace {
// Relative headroom so the realized trigger response clears Delta under
// floating-point round-off while staying within the 1e-9 relative contract.
constexpr double kGainHeadroom = 5e-10;
}  // namespace

void AttackParams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw DomainError("gamma must be in (0, 1)");
  if (!(delta > 0.0) || delta > 1.0)
    throw DomainError("delta must be in (0, 1]");
  if (Delta < 0.0) throw DomainError("Delta must be nonnegative");
  if (eps < 0.0) throw DomainError("eps must be nonnegative");
  if (g_kind != Activation::ReLU && g_kind != Activation::Sigmoid)
    throw DomainError("attack activation must be relu or sigmoid");
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  if (!(kappa_margin > 0.0)) throw DomainError("kappa_margin must be positive");
  if (g_kind == Activation::Sigmoid && !(eps > 0.0))
    throw DomainError("sigmoid attacks require eps > 0");
  if (M < 0) throw DomainError("M must be nonnegative");
}

KappaGain choose_kappa_gain(Activation g_kind, double gamma,
                            double xprime_norm_sq, double eps, double Delta,
                            double kappa_margin, int sign) {
  if (!(xprime_norm_sq > 0.0))
    throw DomainError("choose_kappa_gain: |x'|^2 must be positive");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw DomainError("choose_kappa_gain: gamma must be in (0, 1)");
  if (sign != 1 && sign != -1)
    throw DomainError("choose_kappa_gain: sign must be +1 or -1");
  const double z = 0.5 * (1.0 - gamma) * xprime_norm_sq;

  KappaGain kg;
  if (g_kind == Activation::ReLU) {
    if (!(Delta > 0.0))
      throw DomainError("choose_kappa_gain: ReLU attack with Delta = 0 is a no-op");
    kg.kappa = (Delta / z) * (1.0 + kGainHeadroom);
    kg.D = static_cast<double>(sign);
  } else if (g_kind == Activation::Sigmoid) {
    if (!(eps > 0.0))
      throw DomainError("choose_kappa_gain: sigmoid attack requires eps > 0");
    if (!(Delta > 0.0))
      throw DomainError("choose_kappa_gain: sigmoid attack requires Delta > 0");
    if (!(kappa_margin > 0.0))
      throw DomainError("choose_kappa_gain: kappa_margin must be positive");
    kg.kappa = (std::log(Delta / eps) + kappa_margin) / z;
    kg.D = sign * (Delta * (1.0 + kGainHeadroom)) / sigmoid(kg.kappa * z);
  } else {
    throw DomainError("choose_kappa_gain: activation must be relu or sigmoid");
  }
  return kg;
}

namespace {

AttackNeuron build_neuron(const AttackParams& params, const Vec& x_prime,
                          double R, double bias_shift) {
  params.validate();
  if (!(R > 0.0)) throw DomainError("attack plan: R must be positive");
  const double norm_sq = x_prime.squaredNorm();
  if (!(norm_sq > 0.0)) throw DomainError("attack plan: x' must be nonzero");
  const double norm = std::sqrt(norm_sq);
  if (params.gamma * norm > 1.0)
    throw DomainError("attack plan: trigger condition gamma*|x'| <= 1 violated "
                      "(gamma*|x'| = " + std::to_string(params.gamma * norm) + ")");

  const KappaGain kg =
      choose_kappa_gain(params.g_kind, params.gamma, norm_sq, params.eps,
                        params.Delta, params.kappa_margin, params.sign);
  AttackNeuron neuron;
  neuron.w = (kg.kappa / R) * x_prime;
  neuron.b = 0.5 * kg.kappa * (1.0 + params.gamma) * norm_sq + kg.kappa * bias_shift;
  neuron.D = kg.D;
  neuron.kappa = kg.kappa;
  neuron.g_kind = params.g_kind;
  neuron.x_prime = x_prime;
  neuron.R = R;
  return neuron;
}

}  // namespace

AttackNeuron plan_plain_attack(const AttackParams& params, const Vec& x_prime,
                               double R) {
  return build_neuron(params, x_prime, R, 0.0);
}

AttackNeuron plan_targeted_attack(const AttackParams& params,
                                  const Vec& x_prime, double R,
                                  const Vec& phi_star) {
  if (phi_star.size() != x_prime.size())
    throw ShapeError("plan_targeted_attack: phi_star dimension mismatch");
  return build_neuron(params, x_prime, R, phi_star.dot(x_prime) / R);
}

double realize_effect(const AttackNeuron& neuron, const Vec& z) {
  if (z.size() != neuron.w.size())
    throw ShapeError("realize_effect: latent dimension mismatch");
  const double pre = z.dot(neuron.w) - neuron.b;
  if (neuron.g_kind == Activation::ReLU)
    return neuron.D * (pre > 0.0 ? pre : 0.0);
  return neuron.D * sigmoid(pre);
}

nlohmann::json neuron_to_json(const AttackNeuron& neuron) {
  nlohmann::json j;
  j["w"] = std::vector<double>(neuron.w.data(), neuron.w.data() + neuron.w.size());
  j["b"] = neuron.b;
  j["D"] = neuron.D;
  j["kappa"] = neuron.kappa;
  j["g_kind"] = to_string(neuron.g_kind);
  j["x_prime"] = std::vector<double>(neuron.x_prime.data(),
                                     neuron.x_prime.data() + neuron.x_prime.size());
  j["R"] = neuron.R;
  return j;
}

AttackNeuron neuron_from_json(const nlohmann::json& j) {
  AttackNeuron neuron;
  try {
    const auto w = j.at("w").get<std::vector<double>>();
    neuron.w = Eigen::Map<const Vec>(w.data(), static_cast<int>(w.size()));
    neuron.b = j.at("b").get<double>();
    neuron.D = j.at("D").get<double>();
    neuron.kappa = j.at("kappa").get<double>();
    neuron.g_kind = activation_from_string(j.at("g_kind").get<std::string>());
    const auto xp = j.at("x_prime").get<std::vector<double>>();
    neuron.x_prime = Eigen::Map<const Vec>(xp.data(), static_cast<int>(xp.size()));
    neuron.R = j.at("R").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("neuron: ") + e.what());
  }
  return neuron;
}

}  // namespace stealth
