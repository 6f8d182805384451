#pragma once

// Physical-to-dimensionless unit conversion, discretization grids and
// phase-space boundary shapes shared by the kernel and spectral layers.
//
// All kernel/spectral code works in the dimensionless units in which the
// unit of position is sqrt(hbar*T/4m) and the unit of momentum is
// sqrt(4*hbar*m/T); PhysicalScales only ever appears at the boundary of
// the system.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "backflow/errors.hpp"

namespace backflow {

struct PhysicalScales {
  double hbar = 1.0;
  double mass = 1.0;
  double T = 1.0;    // duration of the transfer window
  double tau = 1.0;  // reference time; linear correlation slope k = mass/tau

  double slope_k() const { return mass / tau; }

  void validate() const {
    if (!(hbar > 0.0) || !(mass > 0.0) || !(T > 0.0))
      throw InvalidScalesError("PhysicalScales: hbar, mass and T must be positive");
  }
};

// Uniform grid u_k = (L/N) k, k = 0..N (both endpoints included).
struct GridSpec {
  double L = 20.0;
  int N = 1000;

  GridSpec() = default;
  GridSpec(double length, int subintervals) : L(length), N(subintervals) {
    if (!(L > 0.0) || N < 2)
      throw ConfigError("GridSpec: requires L > 0 and N >= 2");
  }

  double weight() const { return L / static_cast<double>(N); }
  double point(int k) const { return weight() * static_cast<double>(k); }
  int point_count() const { return N + 1; }

  std::vector<double> points() const {
    std::vector<double> u(static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) u[static_cast<std::size_t>(k)] = point(k);
    return u;
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.L == b.L && a.N == b.N;
  }
};

// Monotone (Steffen) cubic interpolant. Used for tabulated boundary curves;
// produces no overshoot between samples, so admissibility checked on the
// samples carries to the interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
      throw ConfigError("MonotoneCubic: need at least two samples");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        throw ConfigError("MonotoneCubic: abscissae must be strictly increasing");
    slopes_.resize(n);
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    slopes_[0] = d[0];
    slopes_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        slopes_[i] = 0.0;
      } else {
        const double p = (d[i - 1] * h[i] + d[i] * h[i - 1]) / (h[i - 1] + h[i]);
        const double cap = 2.0 * std::min(std::abs(d[i - 1]), std::abs(d[i]));
        slopes_[i] = (std::abs(p) > cap) ? std::copysign(cap, p) : p;
      }
    }
  }

  double operator()(double x) const {
    const std::size_t n = x_.size();
    if (x <= x_.front()) return y_.front() + slopes_.front() * (x - x_.front());
    if (x >= x_.back()) return y_.back() + slopes_.back() * (x - x_.back());
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double a = y_[i], b = slopes_[i] * h;
    const double dy = y_[i + 1] - y_[i];
    const double c = 3.0 * dy - (2.0 * slopes_[i] + slopes_[i + 1]) * h;
    const double e = -2.0 * dy + (slopes_[i] + slopes_[i + 1]) * h;
    return a + t * (b + t * (c + t * e));
  }

 private:
  std::vector<double> x_, y_, slopes_;
};

// Dimensionless boundary curve x = s(p).
//
// Straight:     s(p) = slope * p
// GaussianBump: s(p) = 2 p (1 + epsilon e^{-p^2}), admissible for epsilon > -1
// Tabulated:    monotone cubic through (p_i, s_i) samples
struct StraightBoundary {
  double slope = 2.0;
};

struct GaussianBumpBoundary {
  double epsilon = 0.0;
};

struct TabulatedBoundary {
  std::vector<double> p;
  std::vector<double> s;
};

class BoundaryShape {
 public:
  using Variant = std::variant<StraightBoundary, GaussianBumpBoundary, TabulatedBoundary>;

  static BoundaryShape straight(double slope) {
    if (!(slope > 0.0)) throw InvalidShapeError("Straight boundary requires slope > 0");
    return BoundaryShape(StraightBoundary{slope});
  }

  static BoundaryShape gaussian_bump(double epsilon) {
    if (!(epsilon > -1.0))
      throw InvalidShapeError(
          "GaussianBump boundary requires epsilon > -1: the curve s(p) - x = 0 "
          "must not penetrate the fourth quadrant of phase space");
    return BoundaryShape(GaussianBumpBoundary{epsilon});
  }

  static BoundaryShape tabulated(std::vector<double> p, std::vector<double> s) {
    if (p.size() != s.size() || p.size() < 2)
      throw InvalidShapeError("Tabulated boundary requires >= 2 (p, s) samples");
    for (std::size_t i = 0; i < p.size(); ++i) {
      if ((p[i] >= 0.0 && s[i] < 0.0) || (p[i] <= 0.0 && s[i] > 0.0))
        throw InvalidShapeError(
            "Tabulated boundary sample violates fourth-quadrant exclusion: "
            "s(p) must satisfy sign(s) = sign(p)");
    }
    BoundaryShape out{TabulatedBoundary{p, s}};
    out.interp_ = MonotoneCubic(std::move(p), std::move(s));
    return out;
  }

  const Variant& variant() const { return v_; }

  bool is_straight() const { return std::holds_alternative<StraightBoundary>(v_); }
  bool is_gaussian_bump() const { return std::holds_alternative<GaussianBumpBoundary>(v_); }
  bool is_tabulated() const { return std::holds_alternative<TabulatedBoundary>(v_); }

  double straight_slope() const { return std::get<StraightBoundary>(v_).slope; }
  double bump_epsilon() const { return std::get<GaussianBumpBoundary>(v_).epsilon; }

  // s(p)
  double operator()(double p) const {
    if (const auto* st = std::get_if<StraightBoundary>(&v_)) return st->slope * p;
    if (const auto* gb = std::get_if<GaussianBumpBoundary>(&v_))
      return 2.0 * p * (1.0 + gb->epsilon * std::exp(-p * p));
    return interp_(p);
  }

  // R(p) = \int_0^p s(q) dq; exact for the analytic families. Needed by the
  // wavepacket oracle (the phase of <p|w>). Not defined for tabulated shapes.
  double antiderivative(double p) const {
    if (const auto* st = std::get_if<StraightBoundary>(&v_)) return 0.5 * st->slope * p * p;
    if (const auto* gb = std::get_if<GaussianBumpBoundary>(&v_))
      return p * p - gb->epsilon * std::exp(-p * p) + gb->epsilon;
    throw UnsupportedShapeError("antiderivative: tabulated boundaries are not supported");
  }

 private:
  explicit BoundaryShape(Variant v) : v_(std::move(v)) {}

  Variant v_;
  MonotoneCubic interp_;
};

// Rescale a boundary given in physical units into the dimensionless form
// s(u) = sqrt(4m/hbar T) * S(u * sqrt(4 hbar m / T)).
//
// For the analytic families the rescaling is exact: a straight physical
// slope c maps to dimensionless slope (4m/T) c (hbar cancels), and a
// Gaussian bump keeps its shape only when the momentum unit is 1, so the
// general path tabulates. Straight boundaries are mapped in closed form.
inline BoundaryShape to_dimensionless(const PhysicalScales& scales, const BoundaryShape& physical) {
  scales.validate();
  const double pos_unit = std::sqrt(scales.hbar * scales.T / (4.0 * scales.mass));
  const double mom_unit = std::sqrt(4.0 * scales.hbar * scales.mass / scales.T);
  if (physical.is_straight()) {
    return BoundaryShape::straight(physical.straight_slope() * mom_unit / pos_unit);
  }
  // General curve: sample densely and tabulate. Sampling range covers the
  // momenta the kernels actually probe (|p| <= 8 momentum units).
  const int count = 2001;
  const double p_max = 8.0;
  std::vector<double> p(count), s(count);
  for (int i = 0; i < count; ++i) {
    const double u = -p_max + 2.0 * p_max * i / (count - 1);
    p[static_cast<std::size_t>(i)] = u;
    s[static_cast<std::size_t>(i)] = physical(u * mom_unit) / pos_unit;
  }
  return BoundaryShape::tabulated(std::move(p), std::move(s));
}

// Constants of the linear-correlation kernel
//   <z|D(T)|z'> = -(1/pi) e^{-i a z^2} sin[b (z^2 - z'^2)]/(z - z') e^{i a z'^2}
// for a state correlated along p = k x with k = mass/tau:
//   a = (1/4 hbar k)(1 + 1/(1 + kT/m)),  b = (1/4 hbar k)(1 - 1/(1 + kT/m)).
// Identities: a + b = 1/(2 hbar k), a - b = 1/(2 hbar k (1 + kT/m)).
inline std::pair<double, double> alpha_beta(const PhysicalScales& scales) {
  scales.validate();
  if (!(scales.tau > 0.0))
    throw InvalidSlopeError("alpha_beta: tau must be positive (slope k = mass/tau)");
  const double k = scales.slope_k();
  const double r = 1.0 / (1.0 + k * scales.T / scales.mass);
  const double base = 1.0 / (4.0 * scales.hbar * k);
  return {base * (1.0 + r), base * (1.0 - r)};
}

// Same constants expressed through the dimensionless straight boundary
// s(p) = sigma p. Writing a = sigma/2, the Gaussian-integral route gives
//   alpha = (1/8)(1/a + 1/(a+2)),  beta = (1/8)(1/a - 1/(a+2)),
// which for sigma = 2 reproduces the closed-form kernel (alpha, beta) =
// (1/6, 1/12). Equivalent to alpha_beta with hbar = 1, k = sigma and
// kT/m = 4/sigma.
inline std::pair<double, double> straight_alpha_beta(double sigma) {
  if (!(sigma > 0.0)) throw InvalidSlopeError("straight_alpha_beta: slope must be positive");
  const double a = 0.5 * sigma;
  return {0.125 * (1.0 / a + 1.0 / (a + 2.0)), 0.125 * (1.0 / a - 1.0 / (a + 2.0))};
}

struct BoundarySample {
  double p;
  double s;
};

// Uniformly sampled boundary curve, for plotting / CSV export.
inline std::vector<BoundarySample> boundary_samples(const BoundaryShape& shape, double p_min,
                                                   double p_max, int count) {
  if (!(p_min < p_max) || count < 2)
    throw ConfigError("boundary_samples: requires p_min < p_max and count >= 2");
  std::vector<BoundarySample> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double p = p_min + (p_max - p_min) * i / (count - 1);
    out[static_cast<std::size_t>(i)] = {p, shape(p)};
  }
  return out;
}

}  // namespace backflow
