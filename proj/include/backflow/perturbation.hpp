#pragma once

// First-order perturbation theory in the bump amplitude epsilon:
// mu(eps) ~ mu(0) + eps * mu1 with mu1 = phi0^H K1 phi0, phi0 the unit
// eigenvector of the unperturbed (epsilon = 0) discretized kernel and K1 the
// discretized first series coefficient on the same grid.

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "backflow/errors.hpp"
#include "backflow/kernels.hpp"
#include "backflow/quadrature.hpp"
#include "backflow/scales.hpp"
#include "backflow/spectral.hpp"

namespace backflow {

inline constexpr double kDegeneracyGap = 1e-6;

struct PerturbationResult {
  double mu0 = 0.0;        // unperturbed largest eigenvalue
  double mu1 = 0.0;        // first-order coefficient, real by Hermiticity
  double imag_leak = 0.0;  // |Im phi0^H K1 phi0|, sanity indicator
  double gap = 0.0;        // mu0 - second eigenvalue
};

namespace detail {

inline constexpr int kGapIterationCap = 200;

// Lower bound on the second-largest eigenvalue via power iteration on the
// shifted, deflated operator A + I - (lam0 + 1) v0 v0^H, capped at a fixed
// iteration count. A near-degenerate lam1 ~ lam0 is well separated from the
// rest of the spectrum and converges within the cap; in the benign clustered
// case the Rayleigh quotient is an underestimate of lam1, which only ever
// reports the gap as larger than a threshold when it truly is.
inline double second_eigenvalue(const Eigen::MatrixXcd& A, double lam0,
                                const Eigen::VectorXcd& v0) {
  const Eigen::Index n = A.rows();
  Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, Complex(1.0 / std::sqrt(double(n)), 0.0));
  v -= v0 * v0.dot(v);
  v.normalize();
  double lam = 0.0, lam_prev = 1e300;
  Eigen::VectorXcd y(n);
  for (int it = 0; it < kGapIterationCap; ++it) {
    y.noalias() = A * v;
    y -= v0 * (lam0 * v0.dot(v));
    lam = v.dot(y).real();
    if (std::abs(lam - lam_prev) < 1e-10) break;
    lam_prev = lam;
    y += v;
    y -= v0 * v0.dot(y);  // re-project against roundoff drift
    v = y / y.norm();
  }
  return lam;
}

}  // namespace detail

// First-order coefficient on a single grid. The top of the spectrum must be
// simple: a gap below kDegeneracyGap makes first-order theory meaningless
// and is rejected.
inline PerturbationResult first_order(const GridSpec& grid, const QuadratureRule& rule,
                                      SeriesTermCache* term_cache = nullptr) {
  const double w = grid.weight();
  AssemblyOptions aopts;
  aopts.term_cache = term_cache;
  const KernelMatrix K0 = assemble(BoundaryShape::gaussian_bump(0.0), grid, 0, rule, aopts);
  const EigenPair top = max_eigenpair(K0);

  PerturbationResult out;
  out.mu0 = top.value;
  out.gap = top.value - detail::second_eigenvalue(K0.entries, top.value, top.vector);
  if (out.gap < kDegeneracyGap)
    throw SolverFailureError("first_order: top eigenvalue nearly degenerate, gap < 1e-6");

  const Eigen::MatrixXcd K1 =
      w * (term_cache != nullptr ? term_cache->get(1, grid, rule) : series_term_matrix(1, grid, rule));
  const Complex expect = top.vector.dot(K1 * top.vector);  // dot conjugates the left argument
  out.mu1 = expect.real();
  out.imag_leak = std::abs(expect.imag());
  return out;
}

struct ExtrapolatedSlope {
  double mu1 = 0.0;  // N -> inf then L -> inf limit of the first-order coefficient
  std::vector<std::pair<double, double>> per_L;  // (L, mu1_L)
};

// Single-grid mu1 carries O(1/N) + O(1/L) discretization bias of the same
// size as the coefficient's distance to the true slope. Extrapolating with
// the same two-stage scheme as the eigenvalues removes it.
inline ExtrapolatedSlope first_order_extrapolated(const std::vector<double>& L_list,
                                                  const std::vector<int>& N_list,
                                                  const QuadratureRule& rule,
                                                  SeriesTermCache* term_cache = nullptr,
                                                  int threads = 1) {
  if (L_list.size() < 2 || N_list.size() < 2)
    throw DegenerateFitError("first_order_extrapolated: need >= 2 grid lengths and sizes");
  const int nl = static_cast<int>(L_list.size());
  const int nn = static_cast<int>(N_list.size());
  std::vector<double> mu1(static_cast<std::size_t>(nl * nn), 0.0);
  std::vector<std::string> errors(static_cast<std::size_t>(nl * nn));
  parallel_for(nl * nn, threads, [&](int idx) {
    const int il = idx / nn, in = idx % nn;
    try {
      const GridSpec grid(L_list[static_cast<std::size_t>(il)],
                          N_list[static_cast<std::size_t>(in)]);
      mu1[static_cast<std::size_t>(idx)] = first_order(grid, rule, term_cache).mu1;
    } catch (const Error& e) {
      errors[static_cast<std::size_t>(idx)] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw SolverFailureError("first_order_extrapolated: " + e);

  ExtrapolatedSlope out;
  std::vector<std::pair<double, double>> outer;
  for (int il = 0; il < nl; ++il) {
    std::vector<std::pair<double, double>> inner;
    for (int in = 0; in < nn; ++in)
      inner.emplace_back(1.0 / N_list[static_cast<std::size_t>(in)],
                         mu1[static_cast<std::size_t>(il * nn + in)]);
    const double mu1_L = extrapolate_linear(inner).intercept;
    out.per_L.emplace_back(L_list[static_cast<std::size_t>(il)], mu1_L);
    outer.emplace_back(1.0 / L_list[static_cast<std::size_t>(il)], mu1_L);
  }
  out.mu1 = extrapolate_linear(outer).intercept;
  return out;
}

// mu(eps) predicted by first-order theory around eps = 0.
inline double linear_prediction(double mu0, double mu1, double epsilon) {
  return mu0 + mu1 * epsilon;
}

}  // namespace backflow
