#pragma once

// Nystrom discretization of the kernel eigenproblems, largest-eigenvalue
// extraction and the two-stage N -> inf, L -> inf extrapolation producing
// supremum estimates.
//
// Discretization is plain Nystrom with uniform weights L/N,
//   A[k][l] = (L/N) kappa(u_k, u_l),   u_k = (L/N) k,
// exactly the discretized eigenproblem used for the published estimates; no
// higher-order quadrature on the eigenproblem itself, so the empirical 1/N
// scaling the extrapolation relies on holds.

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>
#include <tuple>
#include <vector>

#include "backflow/errors.hpp"
#include "backflow/kernels.hpp"
#include "backflow/quadrature.hpp"
#include "backflow/scales.hpp"

namespace backflow {

enum class KernelFamily {
  kAuto,           // pick the kernel from the boundary shape
  kBrackenMelloy,  // canonical BM scaling sin(u^2 - u'^2); straight boundaries only
};

struct KernelMatrix {
  Eigen::MatrixXcd entries;
  GridSpec grid;
  BoundaryShape shape = BoundaryShape::gaussian_bump(0.0);
  int series_order = 0;
  double symmetrization_defect = 0.0;
};

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;  // unit Euclidean norm, phase-fixed
  double residual = 0.0;    // ||A v - value v||
};

// Runs fn(i) for i in [0, count) on up to `threads` workers. Tasks write to
// disjoint slots, so results do not depend on scheduling.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Dense matrix of the n-th series kernel K_n on the grid (no L/N weight).
// Uses the separable structure of the quadrature sum: with
//   F_m(u, j) = exp(-i u^2 / (4 d)) / sqrt(d),  d = zeta_j + i m,
//   A_m(u, j) = (u / d) F_m(u, j),
// the k-th term of K_n is a pair of rank-J products
//   (A_{n-k} W) F_k^H + (F_{n-k} W) A_k^H,
// identical in value to the pointwise series_kernel_term sum.
inline Eigen::MatrixXcd series_term_matrix(int n, const GridSpec& grid,
                                           const QuadratureRule& rule) {
  if (n < 0 || n > kMaxSeriesOrder)
    throw ConfigError("series_term_matrix: order must be in [0, 20]");
  if (rule.size() < 2) throw InvalidRuleError("series_term_matrix: quadrature rule too short");
  const int P = grid.point_count();
  const auto J = static_cast<Eigen::Index>(rule.size());
  const Complex i1(0.0, 1.0);

  // Factor matrices for every m = 0..n.
  std::vector<Eigen::MatrixXcd> F(static_cast<std::size_t>(n) + 1),
      A(static_cast<std::size_t>(n) + 1);
  for (int m = 0; m <= n; ++m) {
    auto& Fm = F[static_cast<std::size_t>(m)];
    auto& Am = A[static_cast<std::size_t>(m)];
    Fm.resize(P, J);
    Am.resize(P, J);
    for (Eigen::Index j = 0; j < J; ++j) {
      const Complex d(rule.nodes[static_cast<std::size_t>(j)], static_cast<double>(m));
      const Complex inv_sqrt = 1.0 / std::sqrt(d);
      for (int a = 0; a < P; ++a) {
        const double u = grid.point(a);
        const Complex f = std::exp(-i1 * (u * u) / (4.0 * d)) * inv_sqrt;
        Fm(a, j) = f;
        Am(a, j) = (u / d) * f;
      }
    }
  }

  Eigen::VectorXd w(J);
  for (Eigen::Index j = 0; j < J; ++j) w(j) = rule.weights[static_cast<std::size_t>(j)];

  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(P, P);
  for (int k = 0; k <= n; ++k) {
    const int m = n - k;
    const double c = ((k % 2 == 0) ? 1.0 : -1.0) / (detail::factorial(m) * detail::factorial(k));
    const auto& Fm = F[static_cast<std::size_t>(m)];
    const auto& Am = A[static_cast<std::size_t>(m)];
    const auto& Fk = F[static_cast<std::size_t>(k)];
    const auto& Ak = A[static_cast<std::size_t>(k)];
    sum.noalias() += c * ((Am * w.asDiagonal()) * Fk.adjoint());
    sum.noalias() += c * ((Fm * w.asDiagonal()) * Ak.adjoint());
  }

  Complex phase(1.0, 0.0);  // (-i)^n
  switch (n % 4) {
    case 1: phase = Complex(0.0, -1.0); break;
    case 2: phase = Complex(-1.0, 0.0); break;
    case 3: phase = Complex(0.0, 1.0); break;
    default: break;
  }
  return (-phase / (8.0 * std::numbers::pi)) * sum;
}

// In-memory cache of series term matrices, shared across the epsilons of a
// scan (the K_n do not depend on epsilon). Thread-safe.
class SeriesTermCache {
 public:
  const Eigen::MatrixXcd& get(int n, const GridSpec& grid, const QuadratureRule& rule) {
    const Key key{grid.L, grid.N, n, rule.size()};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = store_.find(key);
      if (it != store_.end()) return it->second;
    }
    Eigen::MatrixXcd mat = series_term_matrix(n, grid, rule);
    std::lock_guard<std::mutex> lock(mu_);
    return store_.emplace(key, std::move(mat)).first->second;
  }

  void clear() {
    std::lock_guard<std::mutex> lock(mu_);
    store_.clear();
  }

 private:
  using Key = std::tuple<double, int, int, std::size_t>;
  std::mutex mu_;
  std::map<Key, Eigen::MatrixXcd> store_;
};

struct AssemblyOptions {
  KernelFamily family = KernelFamily::kAuto;
  SeriesTermCache* term_cache = nullptr;
};

// Assembles A[k][l] = (L/N) kappa(u_k, u_l), symmetrizes as (A + A^H)/2 and
// records the pre-symmetrization defect (max-norm). Straight boundaries use
// the linear-correlation kernel at (alpha, beta) = straight_alpha_beta(slope)
// (or the canonical BM kernel when requested); Gaussian bumps use the
// truncated epsilon series.
inline KernelMatrix assemble(const BoundaryShape& shape, const GridSpec& grid, int series_order,
                             const QuadratureRule& rule, const AssemblyOptions& opts = {}) {
  const int P = grid.point_count();
  const double w = grid.weight();
  KernelMatrix out;
  out.grid = grid;
  out.shape = shape;
  out.series_order = series_order;

  if (opts.family == KernelFamily::kBrackenMelloy) {
    if (!shape.is_straight())
      throw UnsupportedShapeError("assemble: BM scaling applies to straight boundaries only");
    out.entries.resize(P, P);
    for (int a = 0; a < P; ++a)
      for (int b = 0; b < P; ++b)
        out.entries(a, b) = w * bm_kernel(grid.point(a), grid.point(b));
  } else if (shape.is_straight()) {
    const auto [alpha, beta] = straight_alpha_beta(shape.straight_slope());
    out.entries.resize(P, P);
    for (int a = 0; a < P; ++a)
      for (int b = 0; b < P; ++b)
        out.entries(a, b) = w * linear_kernel(grid.point(a), grid.point(b), alpha, beta);
  } else if (shape.is_gaussian_bump()) {
    const double eps = shape.bump_epsilon();
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(P, P);
    double eps_pow = 1.0;
    for (int n = 0; n <= series_order; ++n) {
      if (n > 0) {
        eps_pow *= eps;
        if (eps_pow == 0.0) break;
      }
      if (opts.term_cache != nullptr) {
        sum.noalias() += eps_pow * opts.term_cache->get(n, grid, rule);
      } else {
        sum.noalias() += eps_pow * series_term_matrix(n, grid, rule);
      }
    }
    out.entries = w * sum;
  } else {
    throw UnsupportedShapeError(
        "assemble: tabulated boundaries have no supported kernel evaluation");
  }

  const Eigen::MatrixXcd adj = out.entries.adjoint();
  out.symmetrization_defect = (out.entries - adj).cwiseAbs().maxCoeff();
  if (out.symmetrization_defect > 1e-8)
    throw AssemblyInconsistencyError("assemble: Hermiticity defect exceeds 1e-8");
  out.entries = 0.5 * (out.entries + adj);
  return out;
}

namespace detail {

// Phase convention: first index attaining max |v_i| is made real-positive.
inline void fix_phase(Eigen::VectorXcd& v) {
  Eigen::Index best = 0;
  double best_abs = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs > 0.0) v *= std::conj(v(best)) / best_abs;
}

}  // namespace detail

inline constexpr int kDenseSolveMaxN = 512;
inline constexpr int kPowerIterationCap = 100000;
inline constexpr double kPowerIterationTol = 1e-12;

// Algebraically largest eigenvalue and unit eigenvector. Full Hermitian
// diagonalization for N <= 512; shifted power iteration (shift +1, making the
// top of the [-1,1] spectrum dominant) for larger matrices.
inline EigenPair max_eigenpair(const KernelMatrix& matrix) {
  const auto& A = matrix.entries;
  if (A.rows() != A.cols() || A.rows() != matrix.grid.point_count())
    throw IncompatibleOperandsError("max_eigenpair: matrix dimensions do not match grid");
  EigenPair out;
  if (matrix.grid.N <= kDenseSolveMaxN) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(A);
    if (solver.info() != Eigen::Success)
      throw SolverFailureError("max_eigenpair: dense Hermitian solve failed");
    const Eigen::Index last = A.rows() - 1;
    out.value = solver.eigenvalues()(last);
    out.vector = solver.eigenvectors().col(last);
  } else {
    const Eigen::Index n = A.rows();
    Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, Complex(1.0 / std::sqrt(double(n)), 0.0));
    double lam = 0.0, lam_prev = 1e300;
    Eigen::VectorXcd y(n);
    bool converged = false;
    for (int it = 0; it < kPowerIterationCap; ++it) {
      y.noalias() = A * v;
      lam = v.dot(y).real();
      if (std::abs(lam - lam_prev) < kPowerIterationTol) {
        converged = true;
        break;
      }
      lam_prev = lam;
      y += v;  // shifted operator A + I
      v = y / y.norm();
    }
    if (!converged) {
      const double res = (A * v - lam * v).norm();
      throw SolverFailureError("max_eigenpair: power iteration hit the cap, residual " +
                               std::to_string(res));
    }
    out.value = lam;
    out.vector = v;
  }
  detail::fix_phase(out.vector);
  out.residual = (A * out.vector - out.value * out.vector).norm();
  return out;
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double residual = 0.0;  // RMS of fit residuals
};

// Least-squares line value ~ intercept + slope * h; the intercept is the
// h -> 0 extrapolation.
inline LineFit extrapolate_linear(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw DegenerateFitError("extrapolate_linear: need >= 2 points");
  bool distinct = false;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].first != points[0].first) distinct = true;
  if (!distinct)
    throw DegenerateFitError("extrapolate_linear: need >= 2 distinct abscissae");
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd X(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = points[static_cast<std::size_t>(i)].first;
    y(i) = points[static_cast<std::size_t>(i)].second;
  }
  const Eigen::Vector2d coef = X.colPivHouseholderQr().solve(y);
  LineFit fit;
  fit.intercept = coef(0);
  fit.slope = coef(1);
  fit.residual = std::sqrt((X * coef - y).squaredNorm() / static_cast<double>(m));
  return fit;
}

struct SupremumEstimate {
  double value = 0.0;  // extrapolated supremum

  struct PerL {
    double L = 0.0;
    double mu_L = 0.0;      // N -> inf extrapolation at this L
    double slope = 0.0;     // C_L of mu_{L,N} ~ mu_L + C_L / N
    double residual = 0.0;  // fit RMS
    bool non_monotone = false;
  };
  std::vector<PerL> per_L;

  struct PerN {
    double L = 0.0;
    int N = 0;
    double mu = 0.0;
  };
  std::vector<PerN> per_N;  // raw Nystrom eigenvalues, row-major over (L, N)

  double final_slope = 0.0;  // C of mu_L ~ mu_sup + C / L
  double final_residual = 0.0;
};

struct EstimateOptions {
  KernelFamily family = KernelFamily::kAuto;
  SeriesTermCache* term_cache = nullptr;
  int threads = 1;
  // Assembly hook; the CLI routes this through the on-disk kernel cache.
  // Defaults to plain assemble().
  std::function<KernelMatrix(const BoundaryShape&, const GridSpec&, int, const QuadratureRule&,
                             const AssemblyOptions&)>
      assembler;
};

// Two-stage extrapolation: for each L fit mu_{L,N} against 1/N, then fit the
// mu_L against 1/L. All (L, N) eigenproblems are independent; they may run on
// a thread pool and the result is bitwise identical regardless of scheduling.
inline SupremumEstimate estimate_supremum(const BoundaryShape& shape,
                                          const std::vector<double>& L_list,
                                          const std::vector<int>& N_list, int series_order,
                                          const QuadratureRule& rule,
                                          const EstimateOptions& opts = {}) {
  if (L_list.size() < 2 || N_list.size() < 2)
    throw DegenerateFitError("estimate_supremum: L_list and N_list need >= 2 entries each");
  for (std::size_t i = 1; i < L_list.size(); ++i)
    if (!(L_list[i] > L_list[i - 1]))
      throw ConfigError("estimate_supremum: L_list must be increasing");
  for (std::size_t i = 1; i < N_list.size(); ++i)
    if (!(N_list[i] > N_list[i - 1]))
      throw ConfigError("estimate_supremum: N_list must be increasing");

  const int nl = static_cast<int>(L_list.size());
  const int nn = static_cast<int>(N_list.size());
  std::vector<double> mu(static_cast<std::size_t>(nl * nn), 0.0);
  std::vector<std::string> errors(static_cast<std::size_t>(nl * nn));

  parallel_for(nl * nn, opts.threads, [&](int idx) {
    const int il = idx / nn, in = idx % nn;
    try {
      const GridSpec grid(L_list[static_cast<std::size_t>(il)],
                          N_list[static_cast<std::size_t>(in)]);
      AssemblyOptions aopts;
      aopts.family = opts.family;
      aopts.term_cache = opts.term_cache;
      const KernelMatrix A = opts.assembler
                                 ? opts.assembler(shape, grid, series_order, rule, aopts)
                                 : assemble(shape, grid, series_order, rule, aopts);
      mu[static_cast<std::size_t>(idx)] = max_eigenpair(A).value;
    } catch (const Error& e) {
      errors[static_cast<std::size_t>(idx)] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw SolverFailureError("estimate_supremum: " + e);

  SupremumEstimate est;
  std::vector<std::pair<double, double>> outer;
  for (int il = 0; il < nl; ++il) {
    std::vector<std::pair<double, double>> inner;
    bool non_monotone = false;
    for (int in = 0; in < nn; ++in) {
      const double m = mu[static_cast<std::size_t>(il * nn + in)];
      est.per_N.push_back({L_list[static_cast<std::size_t>(il)],
                           N_list[static_cast<std::size_t>(in)], m});
      inner.emplace_back(1.0 / N_list[static_cast<std::size_t>(in)], m);
      if (in > 0 && (m - mu[static_cast<std::size_t>(il * nn + in - 1)]) *
                            (inner[1].second - inner[0].second) < 0.0)
        non_monotone = true;
    }
    const LineFit fit = extrapolate_linear(inner);
    est.per_L.push_back({L_list[static_cast<std::size_t>(il)], fit.intercept, fit.slope,
                         fit.residual, non_monotone});
    outer.emplace_back(1.0 / L_list[static_cast<std::size_t>(il)], fit.intercept);
  }
  const LineFit fit = extrapolate_linear(outer);
  est.value = fit.intercept;
  est.final_slope = fit.slope;
  est.final_residual = fit.residual;
  return est;
}

}  // namespace backflow
