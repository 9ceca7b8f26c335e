#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "msdecon/errors.hpp"
#include "msdecon/fractional.hpp"
#include "msdecon/rng.hpp"

namespace msdecon {

//! Constants of the principal-symbol expansion of the error characteristic
//! function: A * iota_s^rho * |s|^r * cf(s) -> 1 with residual O(<s>^-beta0).
struct PrincipalConstants {
  double A = 1.0;
  double rho = 0.0;
  double r = 0.0;
};

//! Blurring distribution of the measurement error, represented through its
//! characteristic function cf(s) = E exp(-i s eps). Only moderately
//! ill-posed models (polynomially decaying cf) are supported.
class ErrorModel {
public:
  enum class Family { none, laplace, gamma, exponential, custom };

  static ErrorModel none()
  {
    ErrorModel m;
    m.family_ = Family::none;
    m.r_ = 0.0;
    m.c_lower_ = m.c_upper_ = 1.0;
    m.principal_ = PrincipalConstants{ 1.0, 0.0, 0.0 };
    m.beta0_ = std::numeric_limits<double>::infinity();
    return m;
  }

  //! Laplace density (2 theta)^{-1} exp(-|x|/theta); cf(s) = (1+theta^2 s^2)^{-1}.
  static ErrorModel laplace(double theta)
  {
    require_scale(theta);
    ErrorModel m;
    m.family_ = Family::laplace;
    m.theta_ = theta;
    m.r_ = 2.0;
    m.c_lower_ = std::min(1.0, 1.0 / (theta * theta));
    m.c_upper_ = std::max(1.0, 1.0 / (theta * theta));
    m.principal_ = PrincipalConstants{ theta * theta, 0.0, 2.0 };
    m.beta0_ = 2.0;
    return m;
  }

  //! Gamma(r, theta) waiting-time error; cf(s) = (1 + i theta s)^{-r}.
  static ErrorModel gamma(double r, double theta)
  {
    require_scale(theta);
    if (r <= 0.0)
      throw config_error("ErrorModel::gamma: r must be positive");
    ErrorModel m;
    m.family_ = Family::gamma;
    m.theta_ = theta;
    m.r_ = r;
    m.c_lower_ = std::min(1.0, std::pow(theta, -r));
    m.c_upper_ = std::max(1.0, std::pow(theta, -r));
    m.principal_ = PrincipalConstants{ std::pow(theta, r), std::fmod(std::fmod(r, 4.0) + 4.0, 4.0), r };
    m.beta0_ = 1.0;
    return m;
  }

  static ErrorModel exponential(double theta)
  {
    ErrorModel m = gamma(1.0, theta);
    m.family_ = Family::exponential;
    return m;
  }

  //! User-supplied model: cf callable plus the declared decay degree and
  //! two-sided envelope constants. Principal constants are optional; without
  //! them only the general statistic path is available.
  static ErrorModel custom(std::function<cplx(double)> cf, double r, double c_lower, double c_upper,
                           std::optional<PrincipalConstants> principal = std::nullopt,
                           double beta0 = 0.0)
  {
    if (!cf)
      throw config_error("ErrorModel::custom: cf callable required");
    if (std::abs(cf(0.0) - cplx(1.0, 0.0)) > 1e-9)
      throw config_error("ErrorModel::custom: cf(0) must equal 1");
    ErrorModel m;
    m.family_ = Family::custom;
    m.custom_cf_ = std::move(cf);
    m.r_ = r;
    m.c_lower_ = c_lower;
    m.c_upper_ = c_upper;
    if (principal)
      m.principal_ = *principal;
    m.beta0_ = beta0;
    return m;
  }

  Family family() const { return family_; }
  double theta() const { return theta_; }
  double ill_posedness() const { return r_; }
  double decay_exponent() const { return beta0_; }
  double c_lower() const { return c_lower_; }
  double c_upper() const { return c_upper_; }
  bool has_principal() const { return principal_.has_value(); }

  //! F(f_eps)(s) = E exp(-i s eps).
  cplx cf(double s) const
  {
    switch (family_) {
    case Family::none:
      return cplx(1.0, 0.0);
    case Family::laplace:
      return cplx(1.0 / (1.0 + theta_ * theta_ * s * s), 0.0);
    case Family::gamma:
    case Family::exponential:
      return std::pow(cplx(1.0, theta_ * s), -r_);
    case Family::custom:
      return custom_cf_(s);
    }
    return cplx(1.0, 0.0);
  }

  //! The deconvolution factor 1/cf(-s) appearing inside v_{t,h}.
  cplx inversion_multiplier(double s) const
  {
    cplx denom = cf(-s);
    if (std::abs(denom) == 0.0)
      throw config_error("ErrorModel: characteristic function vanishes; model is singular");
    return 1.0 / denom;
  }

  PrincipalConstants principal_constants() const
  {
    if (!principal_)
      throw config_error("ErrorModel: principal constants unavailable for this model");
    return *principal_;
  }

  //! n i.i.d. draws, deterministic given the seed.
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const
  {
    Rng rng(seed);
    return sample(n, rng);
  }

  std::vector<double> sample(std::size_t n, Rng& rng) const
  {
    std::vector<double> out(n);
    switch (family_) {
    case Family::none:
      for (auto& x : out)
        x = 0.0;
      break;
    case Family::laplace:
      for (auto& x : out)
        x = rng.laplace(theta_);
      break;
    case Family::gamma:
    case Family::exponential:
      for (auto& x : out)
        x = rng.gamma(r_, theta_);
      break;
    case Family::custom:
      throw config_error("ErrorModel: sampling not available for custom models");
    }
    return out;
  }

  //! Sup norm of the error density, needed for detection boundaries.
  double density_sup() const
  {
    switch (family_) {
    case Family::none:
      throw config_error("ErrorModel: density_sup undefined for the direct problem");
    case Family::laplace:
      return 0.5 / theta_;
    case Family::gamma:
    case Family::exponential: {
      if (r_ < 1.0)
        throw config_error("ErrorModel: gamma density unbounded for r < 1");
      if (r_ == 1.0)
        return 1.0 / theta_;
      double mode = (r_ - 1.0) * theta_;
      return std::pow(mode / theta_, r_ - 1.0) * std::exp(-(mode / theta_)) / (theta_ * std::tgamma(r_));
    }
    case Family::custom:
      throw config_error("ErrorModel: density_sup unavailable for custom models");
    }
    return 0.0;
  }

private:
  static void require_scale(double theta)
  {
    if (theta <= 0.0)
      throw config_error("ErrorModel: scale parameter must be positive");
  }

  Family family_ = Family::none;
  double theta_ = 0.0;
  double r_ = 0.0;
  double c_lower_ = 1.0;
  double c_upper_ = 1.0;
  double beta0_ = 0.0;
  std::optional<PrincipalConstants> principal_ = std::nullopt;
  std::function<cplx(double)> custom_cf_;
};

//! Numerical audit of the model assumptions (two-sided polynomial decay of
//! the characteristic function, principal-expansion residual) on a
//! log-spaced frequency grid.
struct AssumptionReport {
  double sup_scaled_cf = 0.0;   //!< sup |cf(s)| <s>^r
  double inf_scaled_cf = 0.0;   //!< inf |cf(s)| <s>^r
  double sup_residual = 0.0;    //!< sup <s>^beta0 |A iota_s^rho |s|^r cf(s) - 1|
  bool violation = false;
};

inline AssumptionReport validate_assumptions(const ErrorModel& model, double s_max, std::size_t points)
{
  if (points < 2)
    throw config_error("validate_assumptions: need at least 2 points");
  AssumptionReport rep;
  rep.inf_scaled_cf = std::numeric_limits<double>::infinity();

  const bool principal = model.has_principal();
  PrincipalConstants pc;
  if (principal)
    pc = model.principal_constants();

  for (std::size_t i = 0; i < points; ++i) {
    // log-spaced |s| from 1e-3 to s_max, both signs, plus s = 0
    double mag = std::pow(10.0, -3.0 + (std::log10(s_max) + 3.0) * static_cast<double>(i) / (points - 1));
    for (double s : { -mag, mag }) {
      double scaled = std::abs(model.cf(s)) * std::pow(1.0 + s * s, 0.5 * model.ill_posedness());
      rep.sup_scaled_cf = std::max(rep.sup_scaled_cf, scaled);
      rep.inf_scaled_cf = std::min(rep.inf_scaled_cf, scaled);
      if (principal) {
        cplx resid = pc.A * half_axis_phase(s, pc.rho) * std::pow(std::abs(s), pc.r) * model.cf(s) - 1.0;
        double mag_resid = std::abs(resid);
        double weighted =
            mag_resid == 0.0 ? 0.0 : mag_resid * std::pow(1.0 + s * s, 0.5 * model.decay_exponent());
        if (std::isfinite(weighted))
          rep.sup_residual = std::max(rep.sup_residual, weighted);
      }
    }
  }
  rep.violation = !(rep.inf_scaled_cf > 0.0) || !std::isfinite(rep.sup_residual);
  return rep;
}

} // namespace msdecon
