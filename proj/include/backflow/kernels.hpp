#pragma once

// Pointwise evaluation of the integral kernels of the backflow eigenproblems:
//
//   bm_kernel       -(1/pi) sin(u^2 - u'^2)/(u - u')
//   linear_kernel   -(1/pi) e^{-i a z^2} sin[b (z^2 - z'^2)]/(z - z') e^{i a z'^2}
//   k0_closed       the linear kernel at (a, b) = (1/6, 1/12)
//   series_kernel_term / generalized_kernel
//                   the epsilon-power-series kernels K_n(u,u') of the
//                   Gaussian-bump boundary family and their partial sums
//
// All kernels are Hermitian: kappa(b,a) = conj(kappa(a,b)). Removable
// singularities on the diagonal are handled by an explicit branch; naive
// evaluation there divides 0/0.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

#include "backflow/errors.hpp"
#include "backflow/quadrature.hpp"
#include "backflow/scales.hpp"

namespace backflow {

using Complex = std::complex<double>;

inline constexpr int kMaxSeriesOrder = 20;  // factorial table limit
inline constexpr int kDefaultSeriesOrder = 4;
inline constexpr int kDefaultQuadratureCount = 64;

namespace detail {

// Exact integer factorials through 20! (largest that fits in 64 bits).
inline double factorial(int n) {
  static constexpr std::uint64_t table[21] = {
      1ull,
      1ull,
      2ull,
      6ull,
      24ull,
      120ull,
      720ull,
      5040ull,
      40320ull,
      362880ull,
      3628800ull,
      39916800ull,
      479001600ull,
      6227020800ull,
      87178291200ull,
      1307674368000ull,
      20922789888000ull,
      355687428096000ull,
      6402373705728000ull,
      121645100408832000ull,
      2432902008176640000ull};
  if (n < 0 || n > kMaxSeriesOrder)
    throw ConfigError("factorial: series order limited to 20");
  return static_cast<double>(table[n]);
}

inline bool near_diagonal(double u, double u_prime) {
  return std::abs(u - u_prime) < 1e-8 * std::max(1.0, u + u_prime);
}

}  // namespace detail

// Kernel of the Bracken-Melloy integral eigenproblem. Real-valued; returned
// as complex for interface uniformity. Diagonal limit -(2u/pi).
inline Complex bm_kernel(double u, double u_prime) {
  if (detail::near_diagonal(u, u_prime))
    return Complex(-(u + u_prime) / std::numbers::pi, 0.0);
  return Complex(-std::sin(u * u - u_prime * u_prime) / (u - u_prime) / std::numbers::pi, 0.0);
}

// <z|D(T)|z'> for linear position-momentum correlations. Diagonal limit
// -(2 b z / pi); identically zero for b = 0 (no transfer window).
inline Complex linear_kernel(double z, double z_prime, double alpha, double beta) {
  if (beta == 0.0) return Complex(0.0, 0.0);
  double core;
  if (detail::near_diagonal(z, z_prime)) {
    core = -beta * (z + z_prime) / std::numbers::pi;
  } else {
    core = -std::sin(beta * (z * z - z_prime * z_prime)) / (z - z_prime) / std::numbers::pi;
  }
  const Complex phase = std::polar(1.0, alpha * (z_prime * z_prime - z * z));
  return core * phase;
}

// Closed form of the n = 0 series kernel K_0(u,u').
inline Complex k0_closed(double u, double u_prime) {
  return linear_kernel(u, u_prime, 1.0 / 6.0, 1.0 / 12.0);
}

// n-th coefficient kernel of the epsilon expansion,
//
//   K_n(u,u') = -((-i)^n / 8 pi) sum_{k=0}^{n} (-1)^k / ((n-k)! k!)
//               \int_1^3 dzeta ( u/(zeta + i(n-k)) + u'/(zeta - i k) )
//               exp( -i u^2 / (4 [zeta + i(n-k)]) + i u'^2 / (4 (zeta - i k)) )
//               / ( sqrt(zeta + i(n-k)) sqrt(zeta - i k) ),
//
// evaluated with the supplied rule. The two square roots are principal
// branches taken separately and multiplied; the term-by-term Gaussian
// integral behind the expansion fixes this factorized convention, and
// sqrt(ab) != sqrt(a) sqrt(b) in general.
inline Complex series_kernel_term(int n, double u, double u_prime, const QuadratureRule& rule) {
  if (n < 0 || n > kMaxSeriesOrder)
    throw ConfigError("series_kernel_term: order must be in [0, 20]");
  if (rule.size() < 2) throw InvalidRuleError("series_kernel_term: quadrature rule too short");
  const Complex i1(0.0, 1.0);
  Complex sum(0.0, 0.0);
  for (int k = 0; k <= n; ++k) {
    const int m = n - k;
    const double coeff =
        ((k % 2 == 0) ? 1.0 : -1.0) / (detail::factorial(m) * detail::factorial(k));
    Complex integral(0.0, 0.0);
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double zeta = rule.nodes[j];
      const Complex dm(zeta, static_cast<double>(m));
      const Complex dk(zeta, -static_cast<double>(k));
      const Complex expo = -i1 * (u * u) / (4.0 * dm) + i1 * (u_prime * u_prime) / (4.0 * dk);
      const Complex val =
          (u / dm + u_prime / dk) * std::exp(expo) / (std::sqrt(dm) * std::sqrt(dk));
      integral += rule.weights[j] * val;
    }
    sum += coeff * integral;
  }
  // (-i)^n
  Complex phase(1.0, 0.0);
  switch (n % 4) {
    case 0: phase = Complex(1.0, 0.0); break;
    case 1: phase = Complex(0.0, -1.0); break;
    case 2: phase = Complex(-1.0, 0.0); break;
    case 3: phase = Complex(0.0, 1.0); break;
  }
  return -phase / (8.0 * std::numbers::pi) * sum;
}

struct KernelEntryRequest {
  double u = 0.0;
  double u_prime = 0.0;
  BoundaryShape shape = BoundaryShape::gaussian_bump(0.0);
  int series_order = kDefaultSeriesOrder;
};

// Partial sum sum_{n=0}^{order} eps^n K_n(u,u') of the generalized kernel for
// the Gaussian-bump family. Other shapes are rejected: the sinc-identity +
// Gaussian expansion behind K_n is family-specific, and direct evaluation of
// the double oscillatory integral is out of scope.
inline Complex generalized_kernel(const KernelEntryRequest& req, const QuadratureRule& rule) {
  if (!req.shape.is_gaussian_bump())
    throw UnsupportedShapeError(
        "generalized_kernel: only the GaussianBump family has a series kernel");
  if (req.series_order < 0 || req.series_order > kMaxSeriesOrder)
    throw ConfigError("generalized_kernel: series order must be in [0, 20]");
  const double eps = req.shape.bump_epsilon();
  Complex sum = series_kernel_term(0, req.u, req.u_prime, rule);
  double eps_pow = 1.0;
  for (int n = 1; n <= req.series_order && eps != 0.0; ++n) {
    eps_pow *= eps;
    sum += eps_pow * series_kernel_term(n, req.u, req.u_prime, rule);
  }
  return sum;
}

}  // namespace backflow
