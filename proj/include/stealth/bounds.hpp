#pragma once

#include <optional>

#include <json.hpp>

#include "stealth/common.hpp"

namespace stealth {

struct BoundQuery {
  long long M = 0;
  int n = 2;
  std::optional<int> n_p;  // subspace dimension; defaults to n
  double gamma = 0.9;
  double delta = 1.0 / 3.0;
  double alpha = 0.0;
  double eps_collapse = 0.0;  // collapse slack, in [0, gamma*delta]
  double C = 1.0;             // non-degeneracy constant

  int dim() const { return n_p.value_or(n); }
  void validate() const;
};

/// phi(gamma, delta, alpha) = cos(arccos(gamma(1-alpha)delta) + arccos(sqrt(1-alpha^2))).
/// Throws HypothesisError when the result is <= 0.
double phi(double gamma, double delta, double alpha);

struct Quadrature {
  double value = 0.0;
  double error = 0.0;  // accumulated adaptive-Simpson error estimate
};

/// Spherical-cap probability
///   pi^{-1/2} * Gamma(n/2)/Gamma((n-1)/2) * integral_0^theta_max sin^{n-2}(t) dt
/// by adaptive Simpson quadrature (absolute tolerance tol), gamma ratio in
/// log space. Requires n >= 2, theta_max in [0, pi/2).
Quadrature cap_term_integral(int n, double theta_max, double tol = 1e-12);

/// Closed-form cap upper bound
///   (1/(2 sqrt(pi))) * Gamma(n/2)/Gamma(n/2+1/2) * (1/phi) * (1-phi^2)^{(n-1)/2},
/// evaluated in log space. Requires phi in (0, 1].
double cap_term_closed(int n, double phi_val);

struct BoundReport {
  double phi_value = 0.0;
  double p1_integral = 0.0;
  double p1_closed = 0.0;
  double bound_integral = 0.0;
  double bound_closed = 0.0;
  double bound_alpha0 = 0.0;
  std::optional<double> bound_collapse;  // present when gamma*delta < 1/2
  double quadrature_error = 0.0;
};

/// All lower bounds on the success probability for one query. Dimension used
/// is n_p when given.
BoundReport success_bound(const BoundQuery& query);

/// Concentrational-collapse lower bound
///   P_a(eps) = 1 - C(1-2 eps)^n - M (C/2) [2(1/4 - (1/2 - eps - gamma delta)^2)^{1/2}]^n
///              - cap_term_integral(n_p, arccos(phi)).
/// Requires gamma*delta < 1/2 (HypothesisError otherwise).
double collapse_bound(const BoundQuery& query);

nlohmann::json bound_report_to_json(const BoundQuery& query,
                                    const BoundReport& report);

}  // namespace stealth
