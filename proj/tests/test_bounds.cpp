#include <doctest.h>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

#include "stealth/bounds.hpp"
#include "stealth/rng.hpp"

using namespace stealth;
using Float50 = boost::multiprecision::cpp_bin_float_50;

namespace {

// Cap-area identity: the integral form equals (1/2) I_{sin^2 t}((n-1)/2, 1/2).
double cap_via_ibeta(int n, double theta_max) {
  const double s = std::sin(theta_max);
  return 0.5 * boost::math::ibeta(0.5 * (n - 1), 0.5, s * s);
}

double phi_extended(double gamma, double delta, double alpha) {
  const Float50 g(gamma), d(delta), a(alpha);
  const Float50 value =
      cos(acos(g * (1 - a) * d) + acos(sqrt(Float50(1) - a * a)));
  return static_cast<double>(value);
}

double closed_extended(int n, double phi_val) {
  const Float50 p(phi_val), nn(n);
  const Float50 value = 1 / (2 * sqrt(boost::math::constants::pi<Float50>())) *
                        boost::math::tgamma(nn / 2) /
                        boost::math::tgamma(nn / 2 + Float50(0.5)) / p *
                        pow(1 - p * p, (nn - 1) / 2);
  return static_cast<double>(value);
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("phi reduces to gamma*delta at alpha = 0") {
  CHECK(phi(0.9, 1.0 / 3.0, 0.0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(phi(0.5, 0.8, 0.0) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("phi at the reference parameters, extended-precision cross-check") {
  const double v = phi(0.9, 1.0 / 3.0, 0.179);
  CHECK(v > 0.0);
  CHECK(v < 0.3);
  CHECK(v == doctest::Approx(phi_extended(0.9, 1.0 / 3.0, 0.179)).epsilon(1e-13));
}

TEST_CASE("phi hypothesis violation is reported") {
  CHECK_THROWS_AS(phi(1.5, 0.5, 0.0), DomainError);
  // gamma*delta small and alpha large push the sum of angles past pi/2
  CHECK_THROWS_AS(phi(0.9, 1.0 / 6.0, 0.2), HypothesisError);
}

TEST_CASE("cap integral: empty cap and reference values") {
  CHECK(cap_term_integral(112, 0.0).value == 0.0);

  // Reference values from 50-digit quadrature of the formula. The paper's
  // §S.3.5 prints 0.1561 and 4.9180e-4 for these inputs, but both printed
  // values equal the true integral divided by arccos(phi) (a mean-vs-integral
  // slip in its numeric evaluation); the Monte Carlo module reproduces the
  // values asserted here.
  const double p1 = cap_term_integral(112, std::acos(phi(0.9, 1.0 / 3.0, 0.179))).value;
  CHECK(p1 == doctest::Approx(0.23439027513957462).epsilon(1e-10));
  const double p1_a0 = cap_term_integral(112, std::acos(0.3)).value;
  CHECK(p1_a0 == doctest::Approx(6.2267980865961677e-4).epsilon(1e-10));
}

TEST_CASE("cap integral agrees with the incomplete-beta identity") {
  Rng rng(17);
  for (int i = 0; i < 25; ++i) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 500);
    const double theta = rng.uniform(0.01, M_PI / 2.0 - 0.01);
    const Quadrature q = cap_term_integral(n, theta);
    const double oracle = cap_via_ibeta(n, theta);
    CHECK(q.value == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("quadrature self-consistency under tolerance halving") {
  const double theta = std::acos(phi(0.9, 1.0 / 3.0, 0.179));
  const Quadrature coarse = cap_term_integral(112, theta, 1e-12);
  const Quadrature fine = cap_term_integral(112, theta, 5e-13);
  CHECK(std::abs(coarse.value - fine.value) <= coarse.error + 1e-15);
}

TEST_CASE("closed form: zero cap at phi = 1 and extended-precision value") {
  CHECK(cap_term_closed(64, 1.0) == 0.0);
  CHECK(cap_term_closed(200, 0.3) ==
        doctest::Approx(closed_extended(200, 0.3)).epsilon(1e-12));
  CHECK_THROWS_AS(cap_term_closed(64, 0.0), DomainError);
}

TEST_CASE("closed form dominates the integral across a randomized grid") {
  Rng rng(23);
  for (int i = 0; i < 40; ++i) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 400);
    const double p = rng.uniform(0.02, 0.98);
    CHECK(cap_term_integral(n, std::acos(p)).value <= cap_term_closed(n, p));
  }
}

TEST_CASE("cap integral monotone: increasing in theta, decreasing in n") {
  double prev = 0.0;
  for (double theta = 0.1; theta < 1.5; theta += 0.2) {
    const double v = cap_term_integral(96, theta).value;
    CHECK(v > prev);
    prev = v;
  }
  prev = 1.0;
  for (int n : {8, 16, 32, 64, 128, 256}) {
    const double v = cap_term_integral(n, 1.0).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("phi monotone in its arguments over valid ranges") {
  double prev = phi(0.9, 1.0 / 3.0, 0.0);
  for (double a : {0.05, 0.1, 0.15, 0.179}) {
    const double v = phi(0.9, 1.0 / 3.0, a);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(phi(0.95, 1.0 / 3.0, 0.1) > phi(0.9, 1.0 / 3.0, 0.1));
  CHECK(phi(0.9, 0.4, 0.1) > phi(0.9, 1.0 / 3.0, 0.1));
}

TEST_CASE("success bound with empty validation set is one") {
  BoundQuery q;
  q.M = 0;
  q.n = 112;
  q.gamma = 0.9;
  q.delta = 1.0 / 3.0;
  q.alpha = 0.179;
  const BoundReport r = success_bound(q);
  CHECK(r.bound_integral == 1.0);
  CHECK(r.bound_closed == 1.0);
  CHECK(r.bound_alpha0 == 1.0);
}

TEST_CASE("reference query: M=10 renders the bound negative (not useful)") {
  BoundQuery q;
  q.M = 10;
  q.n = 112;
  q.gamma = 0.9;
  q.delta = 1.0 / 3.0;
  q.alpha = 0.179;
  const BoundReport r = success_bound(q);
  CHECK(r.bound_integral < 0.0);
  CHECK(r.bound_integral == doctest::Approx(1.0 - 10.0 * r.p1_integral));
  CHECK(r.p1_integral <= r.p1_closed);
  CHECK(r.bound_integral <= 1.0);
  CHECK(r.bound_alpha0 >= r.bound_closed);  // accuracy never hurts
}

TEST_CASE("bound_integral is monotone non-decreasing in n") {
  double prev = -1e9;
  for (int n : {16, 32, 64, 128, 256, 512}) {
    BoundQuery q;
    q.M = 25;
    q.n = n;
    q.gamma = 0.9;
    q.delta = 1.0 / 3.0;
    q.alpha = 0.1;
    const double b = success_bound(q).bound_integral;
    CHECK(b >= prev);
    prev = b;
  }
}

TEST_CASE("collapse bound: paper's Event-2 factor at n=200, eps=0.01") {
  // (1/2) [2 sqrt(1/4 - (1/2 - eps - gamma delta)^2)]^n with gamma delta = 0.3
  BoundQuery q;
  q.M = 1;
  q.C = 1.0;
  q.n = 200;
  q.gamma = 0.9;
  q.delta = 1.0 / 3.0;
  q.alpha = 0.0;
  q.eps_collapse = 0.01;
  const double q2 = 0.5 - 0.01 - q.gamma * q.delta;
  const double factor = 0.5 * std::pow(2.0 * std::sqrt(0.25 - q2 * q2), 200);
  CHECK(factor == doctest::Approx(8.4343e-8).epsilon(1e-3));

  // collapse_bound assembles 1 - t1 - t2 - t3 from the same pieces
  const double t1 = std::pow(1.0 - 2.0 * q.eps_collapse, 200);
  const double t3 =
      cap_term_integral(q.dim(), std::acos(phi(q.gamma, q.delta, q.alpha))).value;
  CHECK(collapse_bound(q) ==
        doctest::Approx(1.0 - t1 - factor - t3).epsilon(1e-12));
}

TEST_CASE("collapse bound: three subtracted terms at eps=0.02, n_p=112") {
  const double n = 200.0;
  const double t1 = std::pow(1.0 - 2.0 * 0.02, n);
  CHECK(t1 == doctest::Approx(2.8461e-4).epsilon(5e-3));
  const double q2 = 0.5 - 0.02 - 0.3;
  const double t2 = 0.5 * std::pow(2.0 * std::sqrt(0.25 - q2 * q2), n);
  CHECK(t2 == doctest::Approx(4.6866e-7).epsilon(5e-3));
  // third term: see the cap-integral reference-value test for the known
  // discrepancy against the paper's printed 0.1561
}

TEST_CASE("collapse bound at the boundary eps = gamma*delta") {
  BoundQuery q;
  q.M = 3;
  q.C = 2.0;
  q.n = 50;
  q.n_p = 20;
  q.gamma = 0.8;
  q.delta = 0.5;
  q.alpha = 0.05;
  q.eps_collapse = q.gamma * q.delta;  // 0.4
  const double eps = q.eps_collapse;
  const double direct =
      1.0 - q.C * std::pow(1.0 - 2.0 * eps, q.n) -
      3.0 * (q.C / 2.0) *
          std::pow(2.0 * std::sqrt(0.25 - std::pow(0.5 - eps - 0.4, 2)), q.n) -
      cap_term_integral(20, std::acos(phi(q.gamma, q.delta, q.alpha))).value;
  CHECK(collapse_bound(q) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("collapse bound hypothesis gamma*delta < 1/2") {
  BoundQuery q;
  q.n = 50;
  q.gamma = 0.9;
  q.delta = 0.6;  // gamma*delta = 0.54
  CHECK_THROWS_AS(collapse_bound(q), HypothesisError);
  q.delta = 0.4;
  q.eps_collapse = 0.5;  // above gamma*delta
  CHECK_THROWS_AS(collapse_bound(q), DomainError);
}

TEST_CASE("bounds never exceed one across a random sweep") {
  Rng rng(31);
  for (int i = 0; i < 30; ++i) {
    BoundQuery q;
    q.M = static_cast<long long>(rng.next_u64() % 1000);
    q.n = 8 + static_cast<int>(rng.next_u64() % 256);
    q.gamma = rng.uniform(0.5, 0.99);
    q.delta = rng.uniform(0.2, 1.0);
    q.alpha = rng.uniform(0.0, 0.15);
    try {
      const BoundReport r = success_bound(q);
      CHECK(r.bound_integral <= 1.0);
      CHECK(r.bound_closed <= 1.0);
      CHECK(r.bound_alpha0 <= 1.0);
      CHECK(r.p1_integral >= 0.0);
      CHECK(r.p1_integral <= 1.0);
      CHECK(r.p1_integral <= r.p1_closed);
      CHECK(r.bound_alpha0 >= r.bound_closed);
    } catch (const HypothesisError&) {
      // phi <= 0 for this draw; acceptable
    }
  }
}

}  // TEST_SUITE
