#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "msdecon/error_models.hpp"
#include "msdecon/errors.hpp"
#include "msdecon/grid.hpp"
#include "msdecon/polynomial.hpp"

namespace msdecon {

//! Shape-constraint operator op(p) with symbol p(x,xi) = a(x,xi) |xi|^gamma iota_xi^mu.
//!
//! Supported forms are exactly the ones whose adjoint is computable in closed
//! form: integer-order derivative operators with constant or polynomial
//! coefficients, pure Fourier multipliers, and pure fractional derivatives.
struct OperatorSpec {
  enum class Form { derivative, fractional, multiplier, variable_coeff };

  Form form = Form::derivative;
  double m = 1.0;           //!< total operator order
  double gamma = 1.0;       //!< order of the fractional factor carried by lambda
  double mu = 1.0;          //!< phase of the fractional factor carried by lambda
  double mbar = 0.0;        //!< order of the pseudo-differential factor (mbar + gamma = m)
  double principal_mu = 1.0; //!< phase of the principal symbol a_P(x)|xi|^m iota^mu

  int derivative_order = 1;            //!< derivative / variable_coeff forms
  double coefficient = 1.0;            //!< constant coefficient (derivative form)
  std::vector<Polynomial> var_coeffs;  //!< variable_coeff: a_k for k = 0..m
  std::function<cplx(double)> symbol;  //!< multiplier form p(xi)

  //! Principal coefficient a_P(t); real-valued and nonvanishing on [0,1].
  std::function<double(double)> a_P = [](double) { return 1.0; };

  //! op(p) = c * D^m. Factorization: a = c, gamma = mu = m.
  static OperatorSpec derivative(int order, double coeff = 1.0)
  {
    if (order < 0)
      throw config_error("OperatorSpec::derivative: order must be >= 0");
    if (coeff == 0.0)
      throw config_error("OperatorSpec::derivative: coefficient must be nonzero");
    OperatorSpec op;
    op.form = Form::derivative;
    op.derivative_order = order;
    op.coefficient = coeff;
    op.m = order;
    op.gamma = order;
    op.mu = order;
    op.principal_mu = order;
    op.mbar = 0.0;
    op.a_P = [coeff](double) { return coeff; };
    check_gamma(op.gamma);
    return op;
  }

  //! Pure fractional symbol |xi|^gamma iota_xi^mu (e.g. Wicksell: gamma = 3/2, mu = -3/2).
  static OperatorSpec fractional(double gamma, double mu)
  {
    OperatorSpec op;
    op.form = Form::fractional;
    op.m = gamma;
    op.gamma = gamma;
    op.mu = mu;
    op.principal_mu = mu;
    op.mbar = 0.0;
    check_gamma(gamma);
    return op;
  }

  //! x-independent symbol p(xi); `order` is its growth degree m. The
  //! principal data (a_P, principal_mu) describe its top-order part.
  static OperatorSpec multiplier(std::function<cplx(double)> p, double order, double principal_mu,
                                 double principal_coeff = 1.0)
  {
    if (!p)
      throw config_error("OperatorSpec::multiplier: callable required");
    OperatorSpec op;
    op.form = Form::multiplier;
    op.symbol = std::move(p);
    op.m = order;
    op.gamma = 0.0;
    op.mu = 0.0;
    op.principal_mu = principal_mu;
    op.mbar = order;
    op.a_P = [principal_coeff](double) { return principal_coeff; };
    return op;
  }

  //! Differential operator sum_k a_k(x) D^k with polynomial coefficients
  //! (index k in `coeffs`). The leading coefficient is the principal a_P; it
  //! must not vanish on [0,1] when the principal path is used, which the
  //! standardizing-norm check enforces downstream.
  static OperatorSpec variable_coeff(std::vector<Polynomial> coeffs)
  {
    if (coeffs.empty() || coeffs.back().zero())
      throw config_error("OperatorSpec::variable_coeff: empty or degenerate coefficient list");
    int order = static_cast<int>(coeffs.size()) - 1;
    Polynomial lead = coeffs.back();
    OperatorSpec op;
    op.form = Form::variable_coeff;
    op.var_coeffs = std::move(coeffs);
    op.derivative_order = order;
    op.m = order;
    op.gamma = 0.0;
    op.mu = 0.0;
    op.principal_mu = order;
    op.mbar = order;
    op.a_P = [lead](double t) { return lead(t); };
    return op;
  }

  static OperatorSpec identity() { return derivative(0, 1.0); }

private:
  static void check_gamma(double gamma)
  {
    if (!(gamma == 0.0 || gamma >= 1.0))
      throw config_error("OperatorSpec: gamma must lie in {0} or [1, inf)");
  }
};

//! Nonnegative fractional-derivative orders with sigma + tau = r + m, after
//! the allowed re-normalization of (rho, mu): shifting mu by multiples of 4
//! is free, shifting by 2 flips the sign of a_P (iota_s^2 = -1).
struct SigmaTau {
  double sigma = 0.0;
  double tau = 0.0;
  bool a_p_sign_flipped = false;
};

inline SigmaTau sigma_tau(const OperatorSpec& op, const ErrorModel& err)
{
  PrincipalConstants pc = err.principal_constants();
  const double total = pc.r + op.m;
  double x = pc.rho + op.principal_mu;

  // Bring rho + mu into (-1, 1] by steps of 2; track the parity of the shift.
  long shifts = std::lround(x / 2.0);
  double x_norm = x - 2.0 * static_cast<double>(shifts);
  if (x_norm <= -1.0) {
    x_norm += 2.0;
    shifts -= 1;
  } else if (x_norm > 1.0) {
    x_norm -= 2.0;
    shifts += 1;
  }

  if (std::abs(x_norm) > total + 1e-12)
    throw config_error("sigma_tau: no re-normalization achieves sigma, tau >= 0");
  if (op.m == 0.0 && pc.r > 0.0) {
    // Restriction for zero-order operators in genuinely ill-posed problems.
    // The direct identity problem (r = 0, everything trivial) stays allowed.
    if (!(pc.r > 0.5))
      throw config_error("sigma_tau: m = 0 requires ill-posedness r > 1/2");
    if (std::abs(x_norm) > pc.r + 1e-12)
      throw config_error("sigma_tau: m = 0 requires |mu + rho| <= r");
  }

  SigmaTau st;
  st.sigma = 0.5 * (total + x_norm);
  st.tau = 0.5 * (total - x_norm);
  st.a_p_sign_flipped = (shifts % 2) != 0;
  return st;
}

//! Pairing of a shape-constraint operator with an error model; carries the
//! deconvolution multiplier and the ill-posedness split.
struct ProblemSpec {
  OperatorSpec op;
  ErrorModel err;
  std::optional<SigmaTau> split;

  ProblemSpec(OperatorSpec op_, ErrorModel err_)
    : op(std::move(op_))
    , err(std::move(err_))
  {
    if (err.has_principal())
      split = sigma_tau(op, err);
  }

  double total_order() const { return err.ill_posedness() + op.m; }

  const SigmaTau& principal_split() const
  {
    if (!split)
      throw config_error("ProblemSpec: principal path unavailable (no principal constants)");
    return *split;
  }
};

//! lambda_gamma^mu(s) = |s|^gamma iota_s^{-mu} / F(f_eps)(-s).
inline cplx lambda_multiplier(const ProblemSpec& spec, double s)
{
  cplx inv = spec.err.inversion_multiplier(s);
  if (spec.op.gamma == 0.0)
    return inv;
  if (s == 0.0)
    return cplx(0.0, 0.0);
  return std::pow(std::abs(s), spec.op.gamma) * half_axis_phase(s, -spec.op.mu) * inv;
}

//! L2 adjoint applied to a polynomial test function (derivative and
//! variable_coeff forms). The input is understood as compactly supported, so
//! boundary terms of the partial integration vanish.
inline Polynomial adjoint_apply(const OperatorSpec& op, const Polynomial& psi)
{
  switch (op.form) {
  case OperatorSpec::Form::derivative: {
    Polynomial d = psi.derivative(op.derivative_order);
    double sign = (op.derivative_order % 2 == 0) ? 1.0 : -1.0;
    return d * (sign * op.coefficient);
  }
  case OperatorSpec::Form::variable_coeff: {
    Polynomial acc;
    for (std::size_t k = 0; k < op.var_coeffs.size(); ++k) {
      Polynomial term = (op.var_coeffs[k] * psi).derivative(static_cast<int>(k));
      acc = acc + term * ((k % 2 == 0) ? 1.0 : -1.0);
    }
    return acc;
  }
  case OperatorSpec::Form::fractional:
    throw config_error("adjoint_apply: fractional adjoint is carried by the lambda multiplier");
  case OperatorSpec::Form::multiplier:
    throw config_error("adjoint_apply: multiplier form needs a grid function");
  }
  return Polynomial();
}

//! L2 adjoint applied to a grid function (multiplier form: conjugate Fourier
//! multiplier; derivative forms fall back to the polynomial route upstream).
inline GridFunction adjoint_apply(const OperatorSpec& op, const GridFunction& psi)
{
  if (op.form != OperatorSpec::Form::multiplier)
    throw config_error("adjoint_apply(grid): only the multiplier form is spectral");
  GridFunction out = psi;
  std::size_t n = detail::next_pow2(out.size());
  if (n != out.size()) {
    GridFunction padded(out.origin, out.step, n);
    for (std::size_t i = 0; i < out.size(); ++i)
      padded.values[i] = out.values[i];
    out = std::move(padded);
  }
  detail::fft_pow2(out.values, false);
  for (std::size_t b = 0; b < out.size(); ++b)
    out.values[b] *= std::conj(op.symbol(detail::bin_frequency(b, out.size(), out.step)));
  detail::fft_pow2(out.values, true);
  return out;
}

} // namespace msdecon
