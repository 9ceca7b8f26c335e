#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "msdecon/errors.hpp"
#include "msdecon/numeric.hpp"
#include "msdecon/rng.hpp"

namespace msdecon {

namespace detail {

//! Regularized incomplete beta I_x(a,b) by Lentz's continued fraction.
inline double beta_cf(double a, double b, double x)
{
  const double tiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny)
    d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny)
      d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny)
      d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15)
      break;
  }
  return h;
}

inline double reg_inc_beta(double a, double b, double x)
{
  if (x <= 0.0)
    return 0.0;
  if (x >= 1.0)
    return 1.0;
  double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - lbeta);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

} // namespace detail

//! Mixture of beta densities and [0,1]-truncated normals: the synthetic
//! truth for benchmark data, with analytic pdf, derivative and cdf so that
//! op(p)f is computable in coverage experiments.
struct MixtureComponent {
  enum class Type { beta, truncated_normal };
  Type type = Type::beta;
  double p1 = 2.0; //!< beta: a; truncated_normal: mu
  double p2 = 2.0; //!< beta: b; truncated_normal: sigma
  double weight = 1.0;
};

class MixtureDensity {
public:
  MixtureDensity() = default;
  explicit MixtureDensity(std::vector<MixtureComponent> comps)
    : comps_(std::move(comps))
  {
    double total = 0.0;
    for (const auto& c : comps_) {
      if (c.weight < 0.0)
        throw config_error("MixtureDensity: negative weight");
      if (c.type == MixtureComponent::Type::beta && (c.p1 <= 0.0 || c.p2 <= 0.0))
        throw config_error("MixtureDensity: beta parameters must be positive");
      if (c.type == MixtureComponent::Type::truncated_normal && c.p2 <= 0.0)
        throw config_error("MixtureDensity: sigma must be positive");
      total += c.weight;
    }
    if (comps_.empty() || std::abs(total - 1.0) > 1e-9)
      throw config_error("MixtureDensity: weights must sum to 1");
  }

  const std::vector<MixtureComponent>& components() const { return comps_; }

  double pdf(double x) const
  {
    if (x <= 0.0 || x >= 1.0)
      return 0.0;
    double acc = 0.0;
    for (const auto& c : comps_)
      acc += c.weight * component_pdf(c, x);
    return acc;
  }

  //! f'(x) on (0,1).
  double dpdf(double x) const
  {
    if (x <= 0.0 || x >= 1.0)
      return 0.0;
    double acc = 0.0;
    for (const auto& c : comps_) {
      double p = component_pdf(c, x);
      if (c.type == MixtureComponent::Type::beta)
        acc += c.weight * p * ((c.p1 - 1.0) / x - (c.p2 - 1.0) / (1.0 - x));
      else
        acc += c.weight * p * (-(x - c.p1) / (c.p2 * c.p2));
    }
    return acc;
  }

  double cdf(double x) const
  {
    if (x <= 0.0)
      return 0.0;
    if (x >= 1.0)
      return 1.0;
    double acc = 0.0;
    for (const auto& c : comps_) {
      if (c.type == MixtureComponent::Type::beta) {
        acc += c.weight * detail::reg_inc_beta(c.p1, c.p2, x);
      } else {
        double zlo = (0.0 - c.p1) / c.p2, zhi = (1.0 - c.p1) / c.p2;
        double z = (x - c.p1) / c.p2;
        double mass = normal_cdf(zhi) - normal_cdf(zlo);
        acc += c.weight * (normal_cdf(z) - normal_cdf(zlo)) / mass;
      }
    }
    return acc;
  }

  double sample(Rng& rng) const
  {
    double u = rng.uniform();
    double acc = 0.0;
    for (const auto& c : comps_) {
      acc += c.weight;
      if (u <= acc || &c == &comps_.back()) {
        if (c.type == MixtureComponent::Type::beta)
          return rng.beta(c.p1, c.p2);
        double zlo = (0.0 - c.p1) / c.p2, zhi = (1.0 - c.p1) / c.p2;
        double plo = normal_cdf(zlo), phi_ = normal_cdf(zhi);
        double v = plo + rng.uniform() * (phi_ - plo);
        return c.p1 + c.p2 * normal_quantile(v);
      }
    }
    return 0.5; // unreachable
  }

  std::vector<double> sample(std::size_t n, Rng& rng) const
  {
    std::vector<double> out(n);
    for (auto& x : out)
      x = sample(rng);
    return out;
  }

private:
  static double component_pdf(const MixtureComponent& c, double x)
  {
    if (c.type == MixtureComponent::Type::beta) {
      double lbeta = std::lgamma(c.p1) + std::lgamma(c.p2) - std::lgamma(c.p1 + c.p2);
      return std::exp((c.p1 - 1.0) * std::log(x) + (c.p2 - 1.0) * std::log(1.0 - x) - lbeta);
    }
    double zlo = (0.0 - c.p1) / c.p2, zhi = (1.0 - c.p1) / c.p2;
    double mass = normal_cdf(zhi) - normal_cdf(zlo);
    double z = (x - c.p1) / c.p2;
    return std::exp(-0.5 * z * z) / (c.p2 * 2.5066282746310005024 * mass);
  }

  std::vector<MixtureComponent> comps_;
};

} // namespace msdecon
