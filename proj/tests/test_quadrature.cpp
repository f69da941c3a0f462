#include <doctest.h>

#include <cmath>

#include "bie/quadrature.hpp"
#include "oracles.hpp"

using namespace bie;

TEST_CASE("gauss_legendre integrates polynomials exactly") {
  for (int p : {8, 16}) {
    const GaussRule rule = gauss_legendre(p);
    CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-15));
    // degree 2p-1 polynomial: t^(2p-1) integrates to 0, t^(2p-2) to 2/(2p-1)
    double odd = 0.0, even = 0.0;
    for (int j = 0; j < p; ++j) {
      odd += rule.weights[j] * std::pow(rule.nodes[j], 2 * p - 1);
      even += rule.weights[j] * std::pow(rule.nodes[j], 2 * p - 2);
    }
    CHECK(std::abs(odd) < 1e-14);
    CHECK(even == doctest::Approx(2.0 / (2 * p - 1)).epsilon(1e-13));
  }
}

TEST_CASE("log moments match multiprecision references") {
  // int_{-1}^{1} P_k(t) log|x-t| dt, reference values computed externally
  // with 30-digit arithmetic.
  struct Ref {
    int k;
    double x;
    double value;
  };
  const Ref refs[] = {
      {0, 0.3, -1.9085989169493743045},   {1, 0.3, -0.58166283982483164094},
      {3, 0.3, 0.32997864047591434622},   {5, -0.7, -0.14537160856039489957},
      {0, 1.0106, -0.54753308471539000907}, {3, 1.0106, -0.13797186987496144357},
      {10, 1.0003, -0.016984190606913142225}, {15, 0.95, 0.01116063885099097292},
      {15, 2.5, -1.8124144229288719098e-12},
  };
  for (const auto& r : refs) {
    const Eigen::ArrayXd m = log_moments(r.k + 1, r.x);
    CHECK(m[r.k] == doctest::Approx(r.value).epsilon(1e-11));
  }
}

TEST_CASE("log moments at interior targets agree with adaptive quadrature") {
  for (double x : {-0.93, -0.2, 0.0, 0.41, 0.88}) {
    const Eigen::ArrayXd m = log_moments(16, x);
    for (int k : {0, 2, 7, 15}) {
      const auto f = [&](double t) {
        return legendre_values(k + 1, t)[k] * std::log(std::abs(x - t));
      };
      // split at the singularity
      const double ref = oracles::adaptive_simpson(f, -1.0, x - 1e-13) +
                         oracles::adaptive_simpson(f, x + 1e-13, 1.0);
      CHECK(m[k] == doctest::Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("log quadrature weights integrate smooth-times-log products") {
  const GaussRule rule = gauss_legendre(16);
  // f polynomial of degree < 16: the product rule is exact by construction.
  const auto f = [](double t) { return 1.0 + t - 0.5 * t * t + 0.125 * t * t * t; };
  for (double s : {0.37, -0.9, 1.02, 1.3, 2.2}) {
    const Eigen::ArrayXd lam = log_quadrature_weights(rule, s);
    double got = 0.0;
    for (int j = 0; j < 16; ++j) got += lam[j] * f(rule.nodes[j]);
    const auto integrand = [&](double t) { return f(t) * std::log(std::abs(s - t)); };
    double ref;
    if (std::abs(s) < 1.0)
      ref = oracles::adaptive_simpson(integrand, -1.0, s - 1e-13) +
            oracles::adaptive_simpson(integrand, s + 1e-13, 1.0);
    else
      ref = oracles::adaptive_simpson(integrand, -1.0, 1.0);
    CHECK(got == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("moment recurrence and dyadic fallback agree where both apply") {
  // x = 1.004 sits in the dyadic window of log_moments while legendre_q
  // still uses Miller's recurrence, so the two paths are independent.
  const double x = 1.004;
  const Eigen::ArrayXd qa = legendre_q(12, x);
  const Eigen::ArrayXd md = log_moments(12, x);
  for (int k = 1; k < 12; ++k) {
    const double via_q = 2.0 * (qa[k + 1] - qa[k - 1]) / (2 * k + 1);
    CHECK(via_q == doctest::Approx(md[k]).epsilon(1e-10));
  }
}
