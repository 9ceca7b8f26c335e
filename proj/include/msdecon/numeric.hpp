#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace msdecon {

//! Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
//! on the three-term recurrence. Accurate to machine precision for n <= 128.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n)
  {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
      // Chebyshev initial guess.
      double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15)
          break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  //! Integrate f over [a, b].
  double integrate(const std::function<double(double)>& f, double a, double b) const
  {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      acc += weights[i] * f(mid + half * nodes[i]);
    return acc * half;
  }

  //! Composite rule over [a, b] split into `pieces` panels.
  double integrate(const std::function<double(double)>& f, double a, double b, int pieces) const
  {
    double acc = 0.0;
    for (int p = 0; p < pieces; ++p) {
      double lo = a + (b - a) * p / pieces;
      double hi = a + (b - a) * (p + 1) / pieces;
      acc += integrate(f, lo, hi);
    }
    return acc;
  }
};

//! Standard normal CDF.
inline double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / 1.4142135623730950488);
}

//! Standard normal quantile (Acklam's rational approximation refined by one
//! Halley step against erfc, giving ~1e-15 accuracy).
inline double normal_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  static const double a[] = { -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                              1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00 };
  static const double b[] = { -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                              6.680131188771972e+01, -1.328068155288572e+01 };
  static const double c[] = { -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                              -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00 };
  static const double d[] = { 7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                              3.754408661907416e+00 };
  const double plow = 0.02425, phigh = 1.0 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= phigh) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement.
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

//! Upper tail of the Kolmogorov distribution: P(sup |B(t)| > lambda), used to
//! turn a scaled KS statistic into an asymptotic p-value.
inline double kolmogorov_pvalue(double lambda)
{
  if (lambda < 0.2)
    return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16)
      break;
  }
  return std::fmin(1.0, std::fmax(0.0, 2.0 * sum));
}

//! One-sample KS p-value of `sorted` data against a CDF.
inline double ks_test_pvalue(const std::vector<double>& sorted,
                             const std::function<double(double)>& cdf)
{
  std::size_t n = sorted.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double F = cdf(sorted[i]);
    d = std::fmax(d, std::fmax(F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F));
  }
  return kolmogorov_pvalue(std::sqrt(static_cast<double>(n)) * d);
}

//! Two-sample KS p-value (both inputs sorted).
inline double ks_two_sample_pvalue(const std::vector<double>& a, const std::vector<double>& b)
{
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    double fa = static_cast<double>(i) / a.size();
    double fb = static_cast<double>(j) / b.size();
    d = std::fmax(d, std::abs(fa - fb));
  }
  double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  return kolmogorov_pvalue(std::sqrt(ne) * d);
}

} // namespace msdecon
