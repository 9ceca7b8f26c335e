#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "msdecon/errors.hpp"
#include "msdecon/polynomial.hpp"

namespace msdecon {

//! Compactly supported test kernel on [0,1] with a polynomial representation.
//!
//! The beta family phi_k(x) = c_k x^k (1-x)^k with c_k = (2k+1)!/(k!)^2 is
//! the variance-optimal choice for problems of total order k: it minimizes
//! ||phi^(k)||_2 subject to integrating to one.
struct Kernel {
  enum class Family { beta, custom_polynomial };

  Family family = Family::beta;
  int k = 0;           //!< smoothness index (beta family only)
  double scale = 1.0;  //!< normalizing constant c_k (beta family only)
  Polynomial poly;     //!< monomial representation on [0,1]

  //! Evaluate; the kernel vanishes outside the open interval (0,1). The beta
  //! family uses the factored form c_k x^k (1-x)^k, which is exactly
  //! nonnegative (the expanded monomial basis cancels near x = 1).
  double operator()(double x) const
  {
    if (x <= 0.0 || x >= 1.0)
      return 0.0;
    if (family == Family::beta)
      return scale * std::pow(x, k) * std::pow(1.0 - x, k);
    return poly(x);
  }
};

namespace detail {

//! (2k+1)!/(k!)^2 as an exact integer count, via (2k+1) * C(2k,k).
//! Representable exactly in a double for k <= 20.
inline double beta_normalizer(int k)
{
  double binom = 1.0;
  for (int j = 1; j <= k; ++j)
    binom = binom * (k + j) / j; // C(2k,k), exact: partial products are integers
  return (2.0 * k + 1.0) * binom;
}

} // namespace detail

//! Construct the beta kernel phi_k. Supported for k <= 20; beyond that the
//! integer coefficients are no longer exactly representable.
inline Kernel make_beta_kernel(int k)
{
  if (k < 0)
    throw config_error("make_beta_kernel: k must be nonnegative");
  if (k > 20)
    throw config_error("make_beta_kernel: k > 20 not supported (factorial constant overflows)");

  const double ck = detail::beta_normalizer(k);
  // c_k x^k (1-x)^k = c_k sum_j C(k,j) (-1)^j x^{k+j}
  std::vector<double> coeffs(static_cast<std::size_t>(2 * k + 1), 0.0);
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    coeffs[static_cast<std::size_t>(k + j)] = (j % 2 == 0 ? ck : -ck) * binom;
    binom = binom * (k - j) / (j + 1);
  }
  Kernel ker;
  ker.family = Kernel::Family::beta;
  ker.k = k;
  ker.scale = ck;
  ker.poly = Polynomial(std::move(coeffs));
  return ker;
}

//! User-supplied polynomial kernel on [0,1]. Must integrate to one and be
//! nonnegative; kernels with other supports or negative parts are not
//! admissible test kernels.
inline Kernel custom_polynomial_kernel(Polynomial poly)
{
  if (std::abs(poly.integral(0.0, 1.0) - 1.0) > 1e-10)
    throw config_error("custom_polynomial_kernel: kernel must integrate to 1 over [0,1]");
  for (int i = 0; i <= 10000; ++i) {
    if (poly(i / 10000.0) < -1e-12)
      throw config_error("custom_polynomial_kernel: kernel must be nonnegative on [0,1]");
  }
  Kernel ker;
  ker.family = Kernel::Family::custom_polynomial;
  ker.k = 0;
  ker.poly = std::move(poly);
  return ker;
}

//! j-th derivative of the kernel's polynomial part, valid on (0,1). For the
//! beta family this is continuous across the boundary while j < k; for
//! j >= k it is to be read on the open interval only.
inline Polynomial kernel_derivative(const Kernel& phi, int j)
{
  if (j < 0 || j > phi.poly.degree())
    throw config_error("kernel_derivative: order outside [0, degree]");
  return phi.poly.derivative(j);
}

//! Closed form of ||phi_k^(k)||_2 for the beta kernel: (2k)!/k! * sqrt(2k+1).
inline double derivative_norm_closed_form(int k)
{
  if (k < 0 || k > 20)
    throw config_error("derivative_norm_closed_form: k outside [0, 20]");
  double falling = 1.0; // (2k)!/k! = (2k)(2k-1)...(k+1)
  for (int j = k + 1; j <= 2 * k; ++j)
    falling *= j;
  return falling * std::sqrt(2.0 * k + 1.0);
}

} // namespace msdecon
