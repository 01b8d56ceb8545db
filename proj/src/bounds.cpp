#include "stealth/bounds.hpp"

#include <cmath>

namespace stealth {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfLogPi = 0.57236494292470008707;  // 0.5 * ln(pi)

struct Integrand {
  double log_prefactor;  // gamma ratio and 1/sqrt(pi), folded in
  int n;

  double operator()(double theta) const {
    if (theta <= 0.0) return n > 2 ? 0.0 : std::exp(log_prefactor);
    const double s = std::sin(theta);
    if (s <= 0.0) return 0.0;
    return std::exp(log_prefactor + (n - 2) * std::log(s));
  }
};

double simpson(const Integrand& f, double a, double fa, double b, double fb,
               double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

void adaptive(const Integrand& f, double a, double fa, double b, double fb,
              double m, double fm, double whole, double tol, int depth,
              double& value, double& err) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
    value += left + right + diff / 15.0;
    err += std::abs(diff) / 15.0;
    return;
  }
  adaptive(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1, value, err);
  adaptive(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1, value, err);
}

}  // namespace

double phi(double gamma, double delta, double alpha) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw DomainError("phi: gamma must be in (0, 1)");
  if (!(delta > 0.0) || delta > 1.0)
    throw DomainError("phi: delta must be in (0, 1]");
  if (alpha < 0.0 || alpha >= 1.0)
    throw DomainError("phi: alpha must be in [0, 1)");
  const double inner = gamma * (1.0 - alpha) * delta;
  const double value =
      std::cos(std::acos(inner) + std::acos(std::sqrt(1.0 - alpha * alpha)));
  if (!(value > 0.0))
    throw HypothesisError("phi(gamma, delta, alpha) = " + std::to_string(value) +
                          " <= 0: Theorem hypothesis violated");
  return value;
}

Quadrature cap_term_integral(int n, double theta_max, double tol) {
  if (n < 2) throw DomainError("cap_term_integral: n must be >= 2");
  if (theta_max < 0.0 || theta_max >= kPi / 2.0)
    throw DomainError("cap_term_integral: theta_max must be in [0, pi/2)");
  Quadrature q;
  if (theta_max == 0.0) return q;

  const double log_prefactor =
      -kHalfLogPi + std::lgamma(0.5 * n) - std::lgamma(0.5 * (n - 1));
  // The integrand peaks at theta_max (sin is increasing on [0, pi/2)). Factor
  // the peak out so the adaptive tolerance is meaningful relative to the
  // result even when the cap probability is astronomically small.
  const double log_peak = log_prefactor + (n - 2) * std::log(std::sin(theta_max));
  if (log_peak < -740.0) return q;  // value below double underflow
  const double peak = std::exp(log_peak);

  Integrand f;
  f.n = n;
  f.log_prefactor = log_prefactor - log_peak;

  // effective width of the peaked integrand; sets the relative-accuracy floor
  const double width = std::min(
      theta_max, std::tan(theta_max) / static_cast<double>(std::max(1, n - 2)));
  const double scaled_tol = std::min(std::max(width * 1e-10, 1e-300),
                                     tol / std::max(peak, 1e-300));

  const double a = 0.0, b = theta_max, m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(f, a, fa, b, fb, m, fm);
  adaptive(f, a, fa, b, fb, m, fm, whole, scaled_tol, 60, q.value, q.error);
  if (!std::isfinite(q.value))
    throw Error("cap_term_integral: quadrature did not converge");
  q.value *= peak;
  q.error *= peak;
  return q;
}

double cap_term_closed(int n, double phi_val) {
  if (n < 2) throw DomainError("cap_term_closed: n must be >= 2");
  if (!(phi_val > 0.0) || phi_val > 1.0)
    throw DomainError("cap_term_closed: phi must be in (0, 1]");
  if (phi_val == 1.0) return 0.0;
  const double log_value = -std::log(2.0) - kHalfLogPi +
                           std::lgamma(0.5 * n) - std::lgamma(0.5 * n + 0.5) -
                           std::log(phi_val) +
                           0.5 * (n - 1) * std::log1p(-phi_val * phi_val);
  return std::exp(log_value);
}

void BoundQuery::validate() const {
  if (M < 0) throw DomainError("bounds: M must be nonnegative");
  if (n < 2) throw DomainError("bounds: n must be >= 2");
  if (n_p && (*n_p < 2 || *n_p > n))
    throw DomainError("bounds: n_p must satisfy 2 <= n_p <= n");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw DomainError("bounds: gamma must be in (0, 1)");
  if (!(delta > 0.0) || delta > 1.0)
    throw DomainError("bounds: delta must be in (0, 1]");
  if (alpha < 0.0 || alpha >= 1.0)
    throw DomainError("bounds: alpha must be in [0, 1)");
  if (eps_collapse < 0.0)
    throw DomainError("bounds: eps_collapse must be nonnegative");
  if (C < 0.0) throw DomainError("bounds: C must be nonnegative");
}

BoundReport success_bound(const BoundQuery& query) {
  query.validate();
  const int dim = query.dim();
  BoundReport report;
  report.phi_value = phi(query.gamma, query.delta, query.alpha);

  const Quadrature q = cap_term_integral(dim, std::acos(report.phi_value));
  report.p1_integral = q.value;
  report.quadrature_error = q.error;
  report.p1_closed = cap_term_closed(dim, report.phi_value);

  const double m = static_cast<double>(query.M);
  report.bound_integral = 1.0 - m * report.p1_integral;
  report.bound_closed = 1.0 - m * report.p1_closed;
  // alpha = 0 specialization: phi reduces to gamma*delta
  report.bound_alpha0 = 1.0 - m * cap_term_closed(dim, query.gamma * query.delta);
  if (query.gamma * query.delta < 0.5)
    report.bound_collapse = collapse_bound(query);
  return report;
}

double collapse_bound(const BoundQuery& query) {
  query.validate();
  const double gd = query.gamma * query.delta;
  if (!(gd < 0.5))
    throw HypothesisError("collapse bound requires gamma*delta < 1/2, got " +
                          std::to_string(gd));
  if (query.eps_collapse > gd)
    throw DomainError("collapse bound requires eps_collapse <= gamma*delta");

  const double eps = query.eps_collapse;
  const double n = static_cast<double>(query.n);
  const double m = static_cast<double>(query.M);

  const double term1 = query.C * std::exp(n * std::log1p(-2.0 * eps));
  const double q = 0.5 - eps - gd;
  const double base = 2.0 * std::sqrt(0.25 - q * q);
  const double term2 =
      base > 0.0 ? m * (query.C / 2.0) * std::exp(n * std::log(base)) : 0.0;
  const double term3 =
      cap_term_integral(query.dim(),
                        std::acos(phi(query.gamma, query.delta, query.alpha)))
          .value;
  return 1.0 - term1 - term2 - term3;
}

nlohmann::json bound_report_to_json(const BoundQuery& query,
                                    const BoundReport& report) {
  nlohmann::json j;
  j["query"] = {{"M", query.M},
                {"n", query.n},
                {"n_p", query.dim()},
                {"gamma", query.gamma},
                {"delta", query.delta},
                {"alpha", query.alpha},
                {"eps_collapse", query.eps_collapse},
                {"C", query.C}};
  j["phi"] = report.phi_value;
  j["p1_integral"] = report.p1_integral;
  j["p1_closed"] = report.p1_closed;
  j["bound_integral"] = report.bound_integral;
  j["bound_closed"] = report.bound_closed;
  j["bound_alpha0"] = report.bound_alpha0;
  if (report.bound_collapse) j["bound_collapse"] = *report.bound_collapse;
  j["quadrature_error_estimate"] = report.quadrature_error;
  return j;
}

}  // namespace stealth
