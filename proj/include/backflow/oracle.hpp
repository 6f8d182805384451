#pragma once

// Independent wavepacket oracle: build explicit momentum-space states from
// discretized eigenvectors, propagate them freely, and measure the
// left-half-line probability transfer Delta directly from |Psi(x,t)|^2.
// Everything here is hbar = m = 1; physical unit handling stays at the
// interface (scales.hpp).
//
// The momentum grid is uniform with J (power of two) points covering
// [-P, P), stored in FFT wrap order: p_j = j dp for j < J/2 and (j - J) dp
// for j >= J/2, dp = 2P/J. That makes every synthesis/analysis step a plain
// radix-2 FFT with fixed operation order, so results are bit-reproducible.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "backflow/errors.hpp"
#include "backflow/fft.hpp"
#include "backflow/scales.hpp"

namespace backflow {

using Complex = std::complex<double>;

struct MomentumWindow {
  double P = std::numbers::pi / 0.0025;  // half-width of the momentum window
  int J = 1 << 21;                       // grid size, power of two

  void validate() const {
    if (!(P > 0.0) || J < 4 || (J & (J - 1)) != 0)
      throw ConfigError("MomentumWindow: needs P > 0 and J a power of two >= 4");
  }
};

struct WavepacketState {
  std::vector<Complex> f;  // amplitudes in FFT wrap order
  double dp = 0.0;
  double norm_defect = 0.0;  // |1 - norm| measured before renormalization

  int size() const { return static_cast<int>(f.size()); }

  double momentum(int j) const {
    const int M = size();
    return dp * static_cast<double>(j < M / 2 ? j : j - M);
  }

  double norm() const {
    double s = 0.0;
    for (const auto& z : f) s += std::norm(z);
    return s * dp;
  }
};

struct TransferMeasurement {
  double P_left_start = 0.0;
  double P_left_end = 0.0;
  double delta = 0.0;
};

namespace detail {

// Natural cubic spline through uniformly spaced samples (Thomas algorithm on
// the second-derivative system).
class NaturalSpline {
 public:
  NaturalSpline(double x0, double h, std::vector<double> y) : x0_(x0), h_(h), y_(std::move(y)) {
    const std::size_t n = y_.size();
    if (n < 3 || !(h_ > 0.0)) throw ConfigError("NaturalSpline: need >= 3 uniform samples");
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    // interior equations: m[i-1] + 4 m[i] + m[i+1] = 6 (y[i-1] - 2 y[i] + y[i+1]) / h^2
    c[1] = 0.25;
    d[1] = 6.0 * (y_[0] - 2.0 * y_[1] + y_[2]) / (h_ * h_) / 4.0;
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double denom = 4.0 - c[i - 1];
      c[i] = 1.0 / denom;
      const double rhs = 6.0 * (y_[i - 1] - 2.0 * y_[i] + y_[i + 1]) / (h_ * h_);
      d[i] = (rhs - d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = d[i] - c[i] * m_[i + 1];
      if (i == 1) break;
    }
  }

  double operator()(double x) const {
    const std::size_t n = y_.size();
    double t = (x - x0_) / h_;
    std::size_t i = 0;
    if (t > 0.0) i = std::min(static_cast<std::size_t>(t), n - 2);
    const double a = x - (x0_ + h_ * static_cast<double>(i));
    const double b = h_ - a;
    return (m_[i] * b * b * b + m_[i + 1] * a * a * a) / (6.0 * h_) +
           (y_[i] / h_ - m_[i] * h_ / 6.0) * b + (y_[i + 1] / h_ - m_[i + 1] * h_ / 6.0) * a;
  }

 private:
  double x0_, h_;
  std::vector<double> y_, m_;
};

inline void check_tail_and_normalize(WavepacketState& state, double tail_threshold) {
  const int M = state.size();
  const double tail =
      std::max(std::abs(state.f[static_cast<std::size_t>(M / 2)]),
               std::abs(state.f[static_cast<std::size_t>(M / 2 - 1)]));
  double nrm = state.norm();
  if (!(nrm > 0.0)) throw SolverFailureError("wavepacket synthesis produced a null state");
  if (tail / std::sqrt(nrm) > tail_threshold)
    throw WindowTooNarrowError("momentum window too narrow: |f| at |p| = P exceeds threshold");
  state.norm_defect = std::abs(1.0 - nrm);
  const double inv = 1.0 / std::sqrt(nrm);
  for (auto& z : state.f) z *= inv;
}

}  // namespace detail

inline constexpr double kDefaultTailThreshold = 1e-2;

// Reconstructs the physical momentum amplitude from a Nystrom eigenvector in
// the boundary-adapted (w) representation:
//
//   f(p) = (2 pi)^{-1/2} e^{-i R(p)} \int_0^L Phi(u) e^{i u p} du,
//   R(p) = \int_0^p s(q) dq,
//
// with Phi(u) the continuum-normalized eigenfunction, Phi(u_k) =
// phi_k / sqrt(L/N). The integral is evaluated by refining Phi onto a fine
// uniform grid (natural cubic spline), applying trapezoid end weights, and
// zero-padding to the window's FFT length; p_max = pi / du_fine = window.P.
inline WavepacketState state_from_eigvec(const Eigen::VectorXcd& phi, const GridSpec& grid,
                                         const BoundaryShape& shape,
                                         const MomentumWindow& window = {},
                                         double tail_threshold = kDefaultTailThreshold) {
  window.validate();
  if (phi.size() != grid.point_count())
    throw IncompatibleOperandsError("state_from_eigvec: eigenvector length does not match grid");
  const double du_f = std::numbers::pi / window.P;
  const int M = window.J;
  const int nf = static_cast<int>(std::floor(grid.L / du_f)) + 1;
  if (nf > M)
    throw ConfigError("state_from_eigvec: window cannot hold the refined grid (increase J)");

  const double scale = 1.0 / std::sqrt(grid.weight());
  std::vector<double> re(static_cast<std::size_t>(grid.point_count())),
      im(static_cast<std::size_t>(grid.point_count()));
  for (int k = 0; k < grid.point_count(); ++k) {
    re[static_cast<std::size_t>(k)] = phi(k).real() * scale;
    im[static_cast<std::size_t>(k)] = phi(k).imag() * scale;
  }
  const detail::NaturalSpline sr(0.0, grid.weight(), std::move(re));
  const detail::NaturalSpline si(0.0, grid.weight(), std::move(im));

  std::vector<Complex> g(static_cast<std::size_t>(M), Complex(0.0, 0.0));
  for (int n = 0; n < nf; ++n) {
    const double u = du_f * static_cast<double>(n);
    g[static_cast<std::size_t>(n)] = Complex(sr(u), si(u));
  }
  // Continuum-normalize the refined interpolant (trapezoid rule) before
  // synthesis. The Nystrom eigenvector is normalized under uniform weights,
  // which differs from the trapezoid integral by the half cell at u = 0;
  // without this step that difference would masquerade as a synthesis defect.
  double norm_u = 0.0;
  for (int n = 0; n < nf; ++n) {
    const double cell = (n == 0 || n == nf - 1) ? 0.5 : 1.0;
    norm_u += cell * std::norm(g[static_cast<std::size_t>(n)]);
  }
  norm_u *= du_f;
  if (!(norm_u > 0.0)) throw SolverFailureError("state_from_eigvec: null eigenvector");
  const double rescale = 1.0 / std::sqrt(norm_u);
  for (int n = 0; n < nf; ++n) g[static_cast<std::size_t>(n)] *= rescale;
  g[0] *= 0.5;
  g[static_cast<std::size_t>(nf - 1)] *= 0.5;

  // sum_n g_n e^{+i u_n p_j} = sum_n g_n e^{2 pi i n j / M} = M * ifft(g)
  ifft(g);
  WavepacketState state;
  state.dp = 2.0 * std::numbers::pi / (static_cast<double>(M) * du_f);
  state.f.resize(static_cast<std::size_t>(M));
  const double pref = static_cast<double>(M) * du_f / std::sqrt(2.0 * std::numbers::pi);
  for (int j = 0; j < M; ++j) {
    const double p = state.dp * static_cast<double>(j < M / 2 ? j : j - M);
    const double R = shape.antiderivative(p);
    state.f[static_cast<std::size_t>(j)] =
        pref * g[static_cast<std::size_t>(j)] * std::polar(1.0, -R);
  }
  detail::check_tail_and_normalize(state, tail_threshold);
  return state;
}

// Reconstruction in the z representation: the eigenvector holds samples of
// psi(z) on the grid, Psi(z) = psi(z) e^{i alpha z^2}, and
//
//   f(p) = \int dz Psi(z) <p|z>,
//   <p|z> = (2 pi k)^{-1/2} exp(-i p^2 / (2 k) + i z p / k),
//
// synthesized by direct trapezoid summation at every window momentum. Cost is
// O(J N); intended for moderate windows. The chirp e^{i alpha z^2} limits the
// usable alpha: the z grid must resolve it.
inline WavepacketState state_from_eigvec_z(const Eigen::VectorXcd& phi, const GridSpec& grid,
                                           double alpha, double slope_k,
                                           const MomentumWindow& window,
                                           double tail_threshold = kDefaultTailThreshold) {
  window.validate();
  if (phi.size() != grid.point_count())
    throw IncompatibleOperandsError("state_from_eigvec_z: eigenvector length does not match grid");
  if (!(slope_k > 0.0)) throw InvalidSlopeError("state_from_eigvec_z: slope k must be positive");
  const int M = window.J;
  const int P = grid.point_count();
  const double dz = grid.weight();

  std::vector<Complex> Psi(static_cast<std::size_t>(P));
  for (int m = 0; m < P; ++m) {
    const double z = grid.point(m);
    double w = dz;
    if (m == 0 || m == P - 1) w *= 0.5;
    Psi[static_cast<std::size_t>(m)] =
        w * (phi(m) / std::sqrt(dz)) * std::polar(1.0, alpha * z * z);
  }

  WavepacketState state;
  state.dp = 2.0 * window.P / static_cast<double>(M);
  state.f.resize(static_cast<std::size_t>(M));
  const double pref = 1.0 / std::sqrt(2.0 * std::numbers::pi * slope_k);
  for (int j = 0; j < M; ++j) {
    const double p = state.dp * static_cast<double>(j < M / 2 ? j : j - M);
    Complex sum(0.0, 0.0);
    for (int m = 0; m < P; ++m)
      sum += Psi[static_cast<std::size_t>(m)] * std::polar(1.0, grid.point(m) * p / slope_k);
    state.f[static_cast<std::size_t>(j)] =
        pref * std::polar(1.0, -p * p / (2.0 * slope_k)) * sum;
  }
  detail::check_tail_and_normalize(state, tail_threshold);
  return state;
}

// Free evolution: multiply by e^{-i p^2 t / 2}.
inline WavepacketState propagate(const WavepacketState& state, double t) {
  if (!std::isfinite(t)) throw InvalidTimeError("propagate: t must be finite");
  WavepacketState out = state;
  const int M = state.size();
  for (int j = 0; j < M; ++j) {
    const double p = state.momentum(j);
    out.f[static_cast<std::size_t>(j)] *= std::polar(1.0, -0.5 * p * p * t);
  }
  return out;
}

struct ProbLeftResult {
  double left = 0.0;
  double total = 0.0;
};

// P_<(t): synthesize Psi(x, t) = (2 pi)^{-1/2} \int dp f(p) e^{i p x - i p^2 t/2}
// on the conjugate FFT grid x_n = 2 pi n / (M dp) (wrap order) and integrate
// |Psi|^2 over x < 0 with a half-weight cell at x = 0, so that left + right
// equals the total exactly.
inline ProbLeftResult prob_left_detail(const WavepacketState& state, double t) {
  const int M = state.size();
  std::vector<Complex> g(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    const double p = state.momentum(j);
    g[static_cast<std::size_t>(j)] =
        state.f[static_cast<std::size_t>(j)] * std::polar(1.0, -0.5 * p * p * t);
  }
  ifft(g);  // sum_j g_j e^{2 pi i j n / M} / M = sum_j g_j e^{i p_j x_n} / M
  const double dx = 2.0 * std::numbers::pi / (static_cast<double>(M) * state.dp);
  const double pref = static_cast<double>(M) * state.dp / std::sqrt(2.0 * std::numbers::pi);
  ProbLeftResult out;
  double left = 0.0, total = 0.0;
  for (int n = 0; n < M; ++n) {
    const double dens = std::norm(pref * g[static_cast<std::size_t>(n)]);
    total += dens;
    if (n >= M / 2) left += dens;  // wrapped indices are the negative x half
  }
  left += 0.5 * std::norm(pref * g[0]);
  out.left = left * dx;
  out.total = total * dx;
  return out;
}

inline double prob_left(const WavepacketState& state, double t) {
  const ProbLeftResult r = prob_left_detail(state, t);
  if (std::abs(r.total - 1.0) > 1e-3)
    throw LeakageError("prob_left: total probability deviates from 1 by more than 1e-3");
  return r.left;
}

// Delta(tau, T) = P_<(tau + T) - P_<(tau), measured directly from the
// position densities.
inline TransferMeasurement delta_direct(const WavepacketState& state, double tau, double T) {
  if (!(T >= 0.0)) throw InvalidTimeError("delta_direct: T must be nonnegative");
  TransferMeasurement out;
  out.P_left_start = prob_left(state, tau);
  out.P_left_end = prob_left(state, tau + T);
  out.delta = out.P_left_end - out.P_left_start;
  return out;
}

struct ZDensitySample {
  double z;
  double density;
};

// Density of the state at time t in the eigenbasis of p - (m/t) x. With
// k = m/t the free-evolution phase e^{-i p^2 t/2} cancels the e^{+i p^2/(2k)}
// of the conjugated basis function exactly, leaving
//
//   <z|state(t)> = (2 pi k)^{-1/2} \int dp f(p) e^{-i z p / k}.
//
// The sum over the momentum grid uses a per-z phase recurrence (one complex
// multiply per grid point).
inline std::vector<ZDensitySample> z_projection(const WavepacketState& state, double t,
                                                double z_min, double z_max, int count) {
  if (!(t > 0.0)) throw InvalidTimeError("z_projection: requires t > 0 (slope k = m/t)");
  if (!(z_min < z_max) || count < 2)
    throw ConfigError("z_projection: requires z_min < z_max and count >= 2");
  const double k = 1.0 / t;
  const int M = state.size();
  const double pref = state.dp / std::sqrt(2.0 * std::numbers::pi * k);
  std::vector<ZDensitySample> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double z = z_min + (z_max - z_min) * i / (count - 1);
    const Complex step = std::polar(1.0, -z * state.dp / k);
    // ascending physical momentum: j = M/2 .. M-1 (negative p), then 0 .. M/2-1
    Complex phase = std::polar(1.0, -z * state.momentum(M / 2) / k);
    Complex sum(0.0, 0.0);
    for (int j = M / 2; j < M; ++j) {
      sum += state.f[static_cast<std::size_t>(j)] * phase;
      phase *= step;
    }
    for (int j = 0; j < M / 2; ++j) {
      sum += state.f[static_cast<std::size_t>(j)] * phase;
      phase *= step;
    }
    out[static_cast<std::size_t>(i)] = {z, std::norm(pref * sum)};
  }
  return out;
}

// Gaussian packet f(p) = C exp(-(p - p0)^2 / (2 sigma^2) - i p x0); |f|^2 has
// momentum variance sigma^2 / 2 and the packet is centered at x0.
inline WavepacketState gaussian_state(double p0, double sigma, double x0,
                                      const MomentumWindow& window,
                                      double tail_threshold = kDefaultTailThreshold) {
  window.validate();
  if (!(sigma > 0.0)) throw ConfigError("gaussian_state: sigma must be positive");
  WavepacketState state;
  const int M = window.J;
  state.dp = 2.0 * window.P / static_cast<double>(M);
  state.f.resize(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    const double p = state.dp * static_cast<double>(j < M / 2 ? j : j - M);
    const double d = (p - p0) / sigma;
    state.f[static_cast<std::size_t>(j)] =
        std::exp(-0.5 * d * d) * std::polar(1.0, -p * x0);
  }
  detail::check_tail_and_normalize(state, tail_threshold);
  return state;
}

}  // namespace backflow
