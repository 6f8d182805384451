#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "backflow/quadrature.hpp"

using namespace backflow;

TEST_CASE("gauss_legendre basic structure") {
  for (int n : {2, 8, 32, 64}) {
    const QuadratureRule rule = gauss_legendre(n);
    REQUIRE(rule.size() == static_cast<std::size_t>(n));
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      CHECK(rule.nodes[i] > 1.0);
      CHECK(rule.nodes[i] < 3.0);
      CHECK(rule.weights[i] > 0.0);
      if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
      sum += rule.weights[i];
    }
    CHECK(sum == Catch::Approx(2.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(gauss_legendre(1), InvalidRuleError);
}

TEST_CASE("two-point rule has known nodes") {
  const QuadratureRule rule = gauss_legendre(2);
  CHECK(rule.nodes[0] == Catch::Approx(2.0 - 1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(rule.nodes[1] == Catch::Approx(2.0 + 1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(rule.weights[0] == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("polynomial exactness") {
  const QuadratureRule rule = gauss_legendre(8);
  // integrals of x^2 and x^7 over [1,3]
  double q2 = 0.0, q7 = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    q2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
    q7 += rule.weights[i] * std::pow(rule.nodes[i], 7);
  }
  CHECK(q2 == Catch::Approx(26.0 / 3.0).epsilon(1e-13));
  CHECK(q7 == Catch::Approx((6561.0 - 1.0) / 8.0).epsilon(1e-13));
}

TEST_CASE("validate rejects malformed rules") {
  QuadratureRule rule = gauss_legendre(4);
  rule.nodes[0] = 0.5;
  CHECK_THROWS_AS(rule.validate(), InvalidRuleError);

  rule = gauss_legendre(4);
  rule.weights[1] = -rule.weights[1];
  CHECK_THROWS_AS(rule.validate(), InvalidRuleError);

  rule = gauss_legendre(4);
  rule.weights[2] += 1e-6;
  CHECK_THROWS_AS(rule.validate(), InvalidRuleError);

  rule.nodes.clear();
  rule.weights.clear();
  CHECK_THROWS_AS(rule.validate(), InvalidRuleError);
}
