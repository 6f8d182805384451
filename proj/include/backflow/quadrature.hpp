#pragma once

// Gauss-Legendre rules on [1,3], the integration range of the series-kernel
// parameter zeta = 2 + nu.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "backflow/errors.hpp"

namespace backflow {

struct QuadratureRule {
  std::vector<double> nodes;    // abscissae, strictly inside (1,3)
  std::vector<double> weights;  // positive, sum to 2

  std::size_t size() const { return nodes.size(); }

  void validate() const {
    if (nodes.size() < 2 || nodes.size() != weights.size())
      throw InvalidRuleError("QuadratureRule: need >= 2 matching nodes/weights");
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!(nodes[i] > 1.0 && nodes[i] < 3.0))
        throw InvalidRuleError("QuadratureRule: nodes must lie inside (1,3)");
      if (!(weights[i] > 0.0)) throw InvalidRuleError("QuadratureRule: weights must be positive");
      sum += weights[i];
    }
    if (std::abs(sum - 2.0) > 1e-12)
      throw InvalidRuleError("QuadratureRule: weights must sum to 2");
  }
};

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n, mapped
// affinely to [1,3].
inline QuadratureRule gauss_legendre(int count) {
  if (count < 2) throw InvalidRuleError("gauss_legendre: count must be >= 2");
  const int n = count;
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Tricomi-style initial guess, then Newton.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1,1] -> [1,3]; descending cos -> store ascending
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = 2.0 + x;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  rule.validate();
  return rule;
}

}  // namespace backflow
