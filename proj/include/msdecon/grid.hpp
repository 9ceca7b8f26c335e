#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "msdecon/errors.hpp"

namespace msdecon {

using cplx = std::complex<double>;

//! Uniformly sampled function, the numeric carrier for Fourier operations.
struct GridFunction {
  double origin = 0.0;
  double step = 1.0;
  std::vector<cplx> values;

  GridFunction() = default;
  GridFunction(double origin_, double step_, std::size_t count)
    : origin(origin_)
    , step(step_)
    , values(count, cplx(0.0, 0.0))
  {
    if (step_ <= 0.0)
      throw config_error("GridFunction: step must be positive");
    if (count < 2)
      throw config_error("GridFunction: need at least 2 samples");
  }

  std::size_t size() const { return values.size(); }
  double coord(std::size_t i) const { return origin + step * static_cast<double>(i); }
  double end() const { return coord(size()); }

  double max_abs() const
  {
    double m = 0.0;
    for (const auto& v : values)
      m = std::max(m, std::abs(v));
    return m;
  }

  //! Linear interpolation of the real part; zero outside the grid.
  double interp_real(double x) const
  {
    double u = (x - origin) / step;
    if (u < 0.0 || u >= static_cast<double>(size() - 1))
      return 0.0;
    std::size_t i = static_cast<std::size_t>(u);
    double frac = u - static_cast<double>(i);
    return (1.0 - frac) * values[i].real() + frac * values[i + 1].real();
  }

  //! Riemann quadrature of |f|^2.
  double l2_norm_sq() const
  {
    double acc = 0.0;
    for (const auto& v : values)
      acc += std::norm(v);
    return acc * step;
  }

  double max_imag_abs() const
  {
    double m = 0.0;
    for (const auto& v : values)
      m = std::max(m, std::abs(v.imag()));
    return m;
  }
};

namespace detail {

inline std::size_t next_pow2(std::size_t n)
{
  std::size_t p = 1;
  while (p < n)
    p <<= 1;
  return p;
}

//! In-place iterative radix-2 FFT. `inverse` includes the 1/N factor.
inline void fft_pow2(std::vector<cplx>& a, bool inverse)
{
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw config_error("fft_pow2: length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1)
      j ^= bit;
    j ^= bit;
    if (i < j)
      std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = (inverse ? 2.0 : -2.0) * 3.14159265358979323846 / static_cast<double>(len);
    cplx wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        cplx u = a[i + j];
        cplx v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a)
      x *= inv;
  }
}

//! Angular frequency of DFT bin b for a length-n grid with spacing `step`.
inline double bin_frequency(std::size_t b, std::size_t n, double step)
{
  double k = (b <= n / 2) ? static_cast<double>(b)
                          : static_cast<double>(b) - static_cast<double>(n);
  return 2.0 * 3.14159265358979323846 * k / (static_cast<double>(n) * step);
}

} // namespace detail
} // namespace msdecon
