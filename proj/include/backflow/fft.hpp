#pragma once

// Iterative radix-2 complex FFT. Deterministic (fixed operation order, no
// threading); sizes must be powers of two. Sign convention:
//   forward:  X[k] = sum_j x[j] e^{-2 pi i j k / M}
//   inverse:  x[j] = (1/M) sum_k X[k] e^{+2 pi i j k / M}

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "backflow/errors.hpp"

namespace backflow {

namespace detail {

inline void fft_in_place(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ConfigError("fft: length must be a nonzero power of two");
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= inv;
  }
}

}  // namespace detail

inline void fft(std::vector<std::complex<double>>& a) { detail::fft_in_place(a, false); }
inline void ifft(std::vector<std::complex<double>>& a) { detail::fft_in_place(a, true); }

}  // namespace backflow
