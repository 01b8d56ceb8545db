#pragma once

#include <cmath>

#include <json.hpp>

#include "stealth/common.hpp"
#include "stealth/model.hpp"

namespace stealth {

/// The attacker's dial set.
struct AttackParams {
  double gamma = 0.9;
  double delta = 1.0 / 3.0;
  double Delta = 50.0;  // required trigger response
  double eps = 0.0;     // validation tolerance (must be > 0 for sigmoid)
  Activation g_kind = Activation::ReLU;
  int sign = +1;
  double kappa_margin = 2.302585092994046;  // ln 10: sigmoid headroom in log-odds
  long long M = 0;  // expected validation-set cardinality bound

  void validate() const;
};

struct KappaGain {
  double kappa = 0.0;
  double D = 0.0;  // output gain
};

/// Picks kappa and the output gain D for the neuron, with z = 0.5(1-gamma)|x'|^2:
///   ReLU:    kappa = Delta/z, D = sign (exact response Delta, exact 0 below threshold);
///   sigmoid: kappa = (ln(Delta/eps) + margin)/z, D = sign * Delta/sigma(kappa z),
/// satisfying |D| g(-kappa z) <= eps and |D| g(kappa z) >= Delta.
/// kappa (ReLU) / |D| (sigmoid) carry +5e-10 relative headroom so the realized
/// response clears Delta under round-off.
KappaGain choose_kappa_gain(Activation g_kind, double gamma,
                            double xprime_norm_sq, double eps, double Delta,
                            double kappa_margin, int sign);

/// The constructed perturbation: one ReLU or sigmoid unit D*g(<.,w> - b).
struct AttackNeuron {
  Vec w;
  double b = 0.0;
  double D = 0.0;
  double kappa = 0.0;
  Activation g_kind = Activation::ReLU;
  Vec x_prime;  // latent direction the neuron was built from
  double R = 0.0;
};

/// w = kappa*x'/R, b = 0.5*kappa*(1+gamma)*|x'|^2. Requires gamma*|x'| <= 1,
/// R > 0, |x'| > 0.
AttackNeuron plan_plain_attack(const AttackParams& params, const Vec& x_prime,
                               double R);

/// Same as the plain plan except the bias is shifted by kappa*<phi_star,x'>/R.
AttackNeuron plan_targeted_attack(const AttackParams& params,
                                  const Vec& x_prime, double R,
                                  const Vec& phi_star);

/// D * g(<z, w> - b).
double realize_effect(const AttackNeuron& neuron, const Vec& z);

inline double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

nlohmann::json neuron_to_json(const AttackNeuron& neuron);
AttackNeuron neuron_from_json(const nlohmann::json& j);

}  // namespace stealth
