#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "msdecon/errors.hpp"
#include "msdecon/grid.hpp"
#include "msdecon/index_set.hpp"
#include "msdecon/kernels.hpp"
#include "msdecon/numeric.hpp"
#include "msdecon/operators.hpp"
#include "msdecon/polynomial.hpp"

namespace msdecon {

//! Default calibration constant nu = exp(e^2): with this choice both scale
//! weights below are monotone on the whole range h in (0,1].
inline double default_nu()
{
  return std::exp(std::exp(2.0));
}

//! w_h = sqrt(log(nu/h)/2) / log log(nu/h).
inline double scale_weight(double h, double nu)
{
  if (!(nu > std::exp(1.0)))
    throw config_error("scale_weight: nu must exceed e");
  if (!(h > 0.0 && h <= 1.0))
    throw config_error("scale_weight: h must lie in (0,1]");
  double L = std::log(nu / h);
  return std::sqrt(0.5 * L) / std::log(L);
}

//! The additive calibration sqrt(2 log(nu/h)).
inline double scale_drift(double h, double nu)
{
  if (!(nu > std::exp(1.0)))
    throw config_error("scale_drift: nu must exceed e");
  return std::sqrt(2.0 * std::log(nu / h));
}

enum class StatisticMode { general, principal };

//! Test function v_{t,h} in compact polynomial form: v(y) = px((y-t)/h) on
//! [t, t+h] and zero outside. All scale factors live in the coefficients.
struct LocalTestFunction {
  double t = 0.0;
  double h = 1.0;
  Polynomial px;

  double operator()(double y) const
  {
    double x = (y - t) / h;
    if (x < 0.0 || x > 1.0)
      return 0.0;
    return px(x);
  }

  //! Exact L2 norm: ||v||_2^2 = h * int_0^1 px(x)^2 dx.
  double l2_norm() const { return std::sqrt(h * px.inner(px, 0.0, 1.0)); }
};

//! Closed form of the Laplace + monotonicity test function:
//! v(y) = h^{-1} [ (theta^2/h^2) phi'''((y-t)/h) - phi'((y-t)/h) ].
inline LocalTestFunction v_closed_form_laplace_D(double theta, const Kernel& phi, double t, double h)
{
  if (phi.poly.degree() < 3)
    throw config_error("v_closed_form_laplace_D: kernel needs a third derivative");
  LocalTestFunction v;
  v.t = t;
  v.h = h;
  v.px = phi.poly.derivative(3) * (theta * theta / (h * h * h)) + phi.poly.derivative() * (-1.0 / h);
  return v;
}

//! Closed form of v_{t,h} where the inverse characteristic function is a
//! polynomial in the frequency: gamma-family errors (integer r) and Laplace,
//! combined with constant-coefficient derivative operators. Returns nullopt
//! when no closed form applies and the Fourier path must be used.
inline std::optional<LocalTestFunction> closed_form_v(const ProblemSpec& spec, const Kernel& phi,
                                                      double t, double h)
{
  if (spec.op.form != OperatorSpec::Form::derivative)
    return std::nullopt;
  if (phi.family != Kernel::Family::beta)
    return std::nullopt;

  const int m = spec.op.derivative_order;
  const double c = spec.op.coefficient;
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;

  LocalTestFunction v;
  v.t = t;
  v.h = h;

  switch (spec.err.family()) {
  case ErrorModel::Family::none: {
    if (phi.k < m)
      return std::nullopt;
    v.px = phi.poly.derivative(m) * (sign * c * std::pow(h, -m));
    return v;
  }
  case ErrorModel::Family::laplace: {
    if (phi.k < m + 2)
      return std::nullopt;
    double theta = spec.err.theta();
    v.px = phi.poly.derivative(m) * (sign * c * std::pow(h, -m)) +
           phi.poly.derivative(m + 2) * (-sign * c * theta * theta * std::pow(h, -(m + 2)));
    return v;
  }
  case ErrorModel::Family::gamma:
  case ErrorModel::Family::exponential: {
    double r = spec.err.ill_posedness();
    int ri = static_cast<int>(std::lround(r));
    if (std::abs(r - ri) > 1e-12 || phi.k < m + ri)
      return std::nullopt;
    double theta = spec.err.theta();
    // 1/cf(-s) = (1 - i theta s)^r: v = c (-1)^m sum_j C(r,j) (-theta)^j g^{(m+j)}
    Polynomial acc;
    double binom = 1.0;
    double tpow = 1.0;
    for (int j = 0; j <= ri; ++j) {
      acc = acc + phi.poly.derivative(m + j) * (binom * tpow * std::pow(h, -(m + j)));
      binom = binom * (ri - j) / (j + 1);
      tpow *= -theta;
    }
    v.px = acc * (sign * c);
    return v;
  }
  case ErrorModel::Family::custom:
    return std::nullopt;
  }
  return std::nullopt;
}

//! ||D_+^order phi||_2 by spectral quadrature; exact polynomial integration
//! when the order is an integer.
inline double fractional_derivative_norm(const Kernel& phi, double order)
{
  int oi = static_cast<int>(std::lround(order));
  if (std::abs(order - oi) < 1e-12 && oi <= phi.poly.degree()) {
    Polynomial d = phi.poly.derivative(oi);
    return d.l2_norm(0.0, 1.0);
  }
  // |F(D^b phi)| = |s|^b |F(phi)|; integrate the squared modulus.
  const std::size_t n = 1 << 16;
  const double step = 4.0 / static_cast<double>(n >> 4); // span 64, support [0,1]
  GridFunction g(-31.5, step, n);
  for (std::size_t i = 0; i < n; ++i)
    g.values[i] = phi(g.coord(i));
  detail::fft_pow2(g.values, false);
  double acc = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    double s = detail::bin_frequency(b, n, step);
    acc += std::pow(std::abs(s), 2.0 * order) * std::norm(g.values[b]) * step * step;
  }
  double dxi = 2.0 * 3.14159265358979323846 / (static_cast<double>(n) * step);
  return std::sqrt(acc * dxi / (2.0 * 3.14159265358979323846));
}

//! Spectral construction of v_{t,h}: sample phi((.-t)/h), apply the
//! adjoint of the pseudo-differential factor, then the multiplier
//! lambda_gamma^mu in the frequency domain, and invert.
//!
//! Throws resolution_error when the multiplier-weighted spectrum still
//! carries noticeable energy near the Nyquist frequency (aliasing).
inline GridFunction v_fourier(const ProblemSpec& spec, const Kernel& phi, double t, double h,
                              double grid_step, double domain_halfwidth = 8.0)
{
  if (domain_halfwidth < 8.0)
    throw config_error("v_fourier: domain_halfwidth must be >= 8 to capture the tails");
  if (grid_step <= 0.0 || grid_step > h)
    throw config_error("v_fourier: grid_step must lie in (0, h]");

  const std::size_t count =
      detail::next_pow2(static_cast<std::size_t>(std::ceil(2.0 * domain_halfwidth / grid_step)));
  const double mid = t + 0.5 * h;
  GridFunction g(mid - grid_step * static_cast<double>(count / 2), grid_step, count);

  // Base samples: the adjoint of the pseudo-differential part applied to
  // phi((.-t)/h). Derivative and fractional forms carry their whole symbol
  // in lambda, so the base is the shifted kernel itself.
  switch (spec.op.form) {
  case OperatorSpec::Form::derivative:
  case OperatorSpec::Form::fractional:
    for (std::size_t i = 0; i < count; ++i)
      g.values[i] = phi((g.coord(i) - t) / h);
    break;
  case OperatorSpec::Form::multiplier:
    for (std::size_t i = 0; i < count; ++i)
      g.values[i] = phi((g.coord(i) - t) / h);
    break;
  case OperatorSpec::Form::variable_coeff: {
    // sum_k (-D)^k (a_k * phi((.-t)/h)) worked out in the local variable
    // u = (x-t)/h, where the polynomial coefficients stay small:
    // (-D_x)^k = (-1)^k h^{-k} D_u^k and a_k(x) = a_k(t + h u).
    Polynomial acc;
    for (std::size_t k = 0; k < spec.op.var_coeffs.size(); ++k) {
      Polynomial a_local = spec.op.var_coeffs[k].compose_affine(h, t);
      Polynomial term = (a_local * phi.poly).derivative(static_cast<int>(k));
      double sign = (k % 2 == 0) ? 1.0 : -1.0;
      acc = acc + term * (sign * std::pow(h, -static_cast<double>(k)));
    }
    for (std::size_t i = 0; i < count; ++i) {
      double u = (g.coord(i) - t) / h;
      g.values[i] = (u >= 0.0 && u <= 1.0) ? acc(u) : 0.0;
    }
    break;
  }
  }

  detail::fft_pow2(g.values, false);

  const bool constant_coeff_derivative = spec.op.form == OperatorSpec::Form::derivative;
  double top_energy = 0.0, total_energy = 0.0;
  const double nyquist = 3.14159265358979323846 / grid_step;
  for (std::size_t b = 0; b < count; ++b) {
    double s = detail::bin_frequency(b, count, grid_step);
    cplx factor;
    if (constant_coeff_derivative) {
      factor = lambda_multiplier(spec, s) * spec.op.coefficient;
    } else if (spec.op.form == OperatorSpec::Form::multiplier) {
      factor = spec.err.inversion_multiplier(s) * std::conj(spec.op.symbol(s));
    } else if (spec.op.form == OperatorSpec::Form::variable_coeff) {
      factor = spec.err.inversion_multiplier(s);
    } else {
      factor = lambda_multiplier(spec, s);
    }
    // The unpaired Nyquist bin has no conjugate partner; keeping only the
    // real part of the factor there preserves the Hermitian symmetry that
    // makes v real for real problems.
    if (b == count / 2)
      factor = cplx(factor.real(), 0.0);
    g.values[b] *= factor;
    double e = std::norm(g.values[b]);
    total_energy += e;
    if (std::abs(s) >= 0.9 * nyquist)
      top_energy += e;
  }
  if (total_energy > 0.0 && top_energy > 0.01 * total_energy)
    throw resolution_error("v_fourier: aliasing detected; refine grid_step");

  // Real problems have an exactly Hermitian product spectrum; rounding
  // asymmetries from the FFT twiddle recurrences are removed here so the
  // output is real to working precision. Genuinely complex spectra are left
  // untouched.
  double asym = 0.0, mag = 0.0;
  for (std::size_t b = 1; b < count / 2; ++b) {
    asym = std::max(asym, std::abs(g.values[count - b] - std::conj(g.values[b])));
    mag = std::max(mag, std::abs(g.values[b]));
  }
  if (mag > 0.0 && asym <= 1e-6 * mag) {
    for (std::size_t b = 1; b < count / 2; ++b) {
      cplx hsym = 0.5 * (g.values[b] + std::conj(g.values[count - b]));
      g.values[b] = hsym;
      g.values[count - b] = std::conj(hsym);
    }
    g.values[0] = cplx(g.values[0].real(), 0.0);
    g.values[count / 2] = cplx(g.values[count / 2].real(), 0.0);
  }

  detail::fft_pow2(g.values, true);
  return g;
}

//! Kernel density estimate of the observed density g, clipped below.
class PilotDensity {
public:
  PilotDensity(std::vector<double> sorted_data, double bandwidth, double floor)
    : data_(std::move(sorted_data))
    , bw_(bandwidth)
    , floor_(floor)
  {
  }

  double bandwidth() const { return bw_; }

  double operator()(double t) const
  {
    // Gaussian kernel truncated at 8 bandwidths (relative error < 1e-14).
    auto lo = std::lower_bound(data_.begin(), data_.end(), t - 8.0 * bw_);
    auto hi = std::upper_bound(data_.begin(), data_.end(), t + 8.0 * bw_);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) {
      double z = (t - *it) / bw_;
      acc += std::exp(-0.5 * z * z);
    }
    double val = acc / (static_cast<double>(data_.size()) * bw_ * 2.5066282746310005024);
    return std::max(val, floor_);
  }

private:
  std::vector<double> data_;
  double bw_;
  double floor_;
};

//! Build the pilot estimator; bandwidth 0 selects Silverman's rule
//! 1.06 sigma-hat n^{-1/5}.
inline PilotDensity pilot_density(std::vector<double> data, double bandwidth = 0.0, double floor = 0.05)
{
  if (data.empty())
    throw config_error("pilot_density: empty data");
  if (floor <= 0.0)
    throw config_error("pilot_density: floor must be positive");
  std::sort(data.begin(), data.end());
  if (bandwidth <= 0.0) {
    if (data.front() == data.back())
      throw config_error("pilot_density: degenerate data (zero variance)");
    double n = static_cast<double>(data.size());
    double mean = 0.0;
    for (double x : data)
      mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : data)
      var += (x - mean) * (x - mean);
    var /= std::max(1.0, n - 1.0);
    bandwidth = 1.06 * std::sqrt(var) * std::pow(n, -0.2);
  }
  return PilotDensity(std::move(data), bandwidth, floor);
}

struct MultiscaleConfig {
  double nu = default_nu();
  double alpha = 0.1;
  double grid_step = 0.0; //!< Fourier / white-noise resolution; 0 = min h / 16
  Kernel kernel;
  ProblemSpec problem;
  double pilot_bandwidth = 0.0; //!< 0 = Silverman rule
  double pilot_floor = 0.05;
  StatisticMode mode = StatisticMode::principal;

  MultiscaleConfig(Kernel k, ProblemSpec p)
    : kernel(std::move(k))
    , problem(std::move(p))
  {
  }

  double resolved_step(double min_h) const
  {
    double step = grid_step > 0.0 ? grid_step : min_h / 16.0;
    if (step > min_h / 16.0 + 1e-15)
      throw resolution_error("grid_step exceeds min h / 16");
    return step;
  }

  void validate() const
  {
    if (!(nu > std::exp(1.0)))
      throw config_error("MultiscaleConfig: nu must exceed e");
    if (!(alpha > 0.0 && alpha < 1.0))
      throw config_error("MultiscaleConfig: alpha must lie in (0,1)");
    if (pilot_floor <= 0.0)
      throw config_error("MultiscaleConfig: pilot_floor must be positive");
  }
};

struct StatisticRow {
  double t = 0.0;
  double h = 0.0;
  double T = 0.0;       //!< local statistic T_{t,h}
  double V = 0.0;       //!< standardizing norm (mode dependent)
  double ghat = 0.0;    //!< pilot density at t
  double w = 0.0;       //!< w_h
  double drift = 0.0;   //!< sqrt(2 log(nu/h))
};

struct StatisticTable {
  std::vector<StatisticRow> rows;
};

//! Principal standardization V^P_{t,h} = h^{1/2-m-r} |A a_P(t)| ||D^{r+m} phi||_2,
//! with the kernel-derivative norm supplied precomputed.
inline double principal_norm(const ProblemSpec& spec, double t, double h, double kernel_norm)
{
  PrincipalConstants pc = spec.err.principal_constants();
  double a = std::abs(spec.op.a_P(t));
  return std::pow(h, 0.5 - spec.total_order()) * pc.A * a * kernel_norm;
}

//! Per-pair statistics over the index set. Data are assumed to live on the
//! analysis window [0,1] (rescale upstream if needed). Pairs are
//! independent, so the table is filled in parallel when workers > 1; the
//! result does not depend on the scheduling.
inline StatisticTable statistics_over_set(const std::vector<double>& data, const ScaleLocationSet& set,
                                          const MultiscaleConfig& config, int workers = 1)
{
  config.validate();
  set.validate();
  if (data.empty())
    throw config_error("statistics_over_set: empty data");

  const double min_h = set.min_scale();
  const double step = config.resolved_step(min_h);
  for (const auto& pr : set.pairs) {
    if (pr.h < 16.0 * step - 1e-15)
      throw resolution_error("statistics_over_set: scale below grid feasibility bound");
  }

  std::vector<double> sorted = data;
  std::sort(sorted.begin(), sorted.end());
  PilotDensity ghat = pilot_density(sorted, config.pilot_bandwidth, config.pilot_floor);

  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(sorted.size()));
  const double kernel_norm =
      config.mode == StatisticMode::principal ? fractional_derivative_norm(config.kernel, config.problem.total_order())
                                              : 0.0;

  StatisticTable table;
  table.rows.resize(set.pairs.size());

  std::exception_ptr first_error = nullptr;
  std::mutex error_mutex;
  auto fill = [&](std::size_t begin, std::size_t stride) {
    try {
      for (std::size_t i = begin; i < set.pairs.size(); i += stride) {
        const auto& pr = set.pairs[i];
        StatisticRow row;
        row.t = pr.t;
        row.h = pr.h;
        row.w = scale_weight(pr.h, config.nu);
        row.drift = scale_drift(pr.h, config.nu);
        row.ghat = ghat(pr.t);

        double T = 0.0;
        double v_norm = 0.0;
        if (auto v = closed_form_v(config.problem, config.kernel, pr.t, pr.h)) {
          auto lo = std::lower_bound(sorted.begin(), sorted.end(), pr.t);
          auto hi = std::upper_bound(sorted.begin(), sorted.end(), pr.t + pr.h);
          for (auto it = lo; it != hi; ++it)
            T += v->px((*it - pr.t) / pr.h);
          T *= inv_sqrt_n;
          v_norm = v->l2_norm();
        } else {
          GridFunction vg = v_fourier(config.problem, config.kernel, pr.t, pr.h, step);
          for (double y : sorted)
            T += vg.interp_real(y);
          T *= inv_sqrt_n;
          v_norm = std::sqrt(vg.l2_norm_sq());
        }

        row.T = T;
        row.V = config.mode == StatisticMode::principal
                    ? principal_norm(config.problem, pr.t, pr.h, kernel_norm)
                    : v_norm;
        if (!(row.V > 0.0))
          throw config_error("statistics_over_set: vanishing standardizing norm");
        table.rows[i] = row;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error)
        first_error = std::current_exception();
    }
  };

  if (workers <= 1) {
    fill(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(fill, static_cast<std::size_t>(w), static_cast<std::size_t>(workers));
    for (auto& th : pool)
      th.join();
  }
  if (first_error)
    std::rethrow_exception(first_error);
  return table;
}

//! T_n = sup over the table of w_h (|T - E T| / (sqrt(ghat) V) - sqrt(2 log nu/h)).
//! `expectations` is used in calibration experiments with known truth; pass
//! an empty vector for the null/simulation case (E T = 0).
inline double multiscale_sup(const StatisticTable& table, const std::vector<double>& expectations,
                             double nu)
{
  (void)nu; // weights are precomputed per row; nu kept for interface symmetry
  if (!expectations.empty() && expectations.size() != table.rows.size())
    throw config_error("multiscale_sup: expectation vector length mismatch");
  double sup = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    double centered = std::abs(r.T - (expectations.empty() ? 0.0 : expectations[i]));
    double val = r.w * (centered / (std::sqrt(r.ghat) * r.V) - r.drift);
    sup = std::max(sup, val);
  }
  return sup;
}

//! sqrt(n) <phi((.-t)/h), op(p) f>: the expectation of T_{t,h} under a known
//! truth, by composite Gauss-Legendre quadrature.
inline double expected_local_statistic(const Kernel& phi, double t, double h,
                                       const std::function<double(double)>& op_f, std::size_t n)
{
  static const GaussLegendre gl(32);
  double integral = gl.integrate([&](double s) { return phi((s - t) / h) * op_f(s); }, t, t + h, 8);
  return std::sqrt(static_cast<double>(n)) * integral;
}

} // namespace msdecon
