#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <thread>
#include <vector>

#include "msdecon/errors.hpp"
#include "msdecon/fractional.hpp"
#include "msdecon/grid.hpp"
#include "msdecon/index_set.hpp"
#include "msdecon/numeric.hpp"
#include "msdecon/rng.hpp"
#include "msdecon/teststat.hpp"

namespace msdecon {

//! Discretized two-sided white noise: independent N(0, step) increments on a
//! uniform grid. The span covers [-0.5, 1.5] so every shifted kernel support
//! (and a margin for spreading test functions) is inside the grid.
struct NoiseGrid {
  double origin = -0.5;
  double step = 1.0;
  std::vector<double> increments;

  void fill(Rng& rng)
  {
    const double sd = std::sqrt(step);
    for (auto& dw : increments)
      dw = sd * rng.normal();
  }
};

struct QuantileEstimate {
  double alpha = 0.1;
  double value = 0.0;
  std::size_t reps = 0;
  double mc_stderr = 0.0;
};

struct SimOptions {
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  int workers = 0;        //!< 0 = hardware concurrency
  double grid_step = 0.0; //!< 0 = min h / 16
  double span_lo = -0.5;
  double span_hi = 1.5;
};

namespace detail {

//! Per-scale sampled test function psi/V, shared by all locations of that
//! scale. Compact profiles hold samples of psi((s-t)/h) indexed from t;
//! spreading profiles hold a dense table in x-units for interpolation.
struct ScaleProfile {
  double h = 0.0;
  double w = 0.0;
  double drift = 0.0;
  double norm = 0.0; //!< continuous-norm standardization V
  bool compact = true;
  std::vector<double> samples; //!< compact: psi at x_i = i*step/h, i < round(h/step)
  double x0 = 0.0, dx = 0.0;
  std::vector<double> table; //!< spreading: psi on [x0, x0 + dx*(size-1)]

  double eval_x(double x) const
  {
    double u = (x - x0) / dx;
    if (u < 0.0 || u >= static_cast<double>(table.size() - 1))
      return 0.0;
    std::size_t i = static_cast<std::size_t>(u);
    double f = u - static_cast<double>(i);
    return (1.0 - f) * table[i] + f * table[i + 1];
  }
};

//! D_+^sigma D_-^tau phi tabulated in x-units (fractional orders).
inline ScaleProfile spread_profile_fractional(const Kernel& phi, double sigma, double tau,
                                              double x_step, double x_max)
{
  ScaleProfile prof;
  prof.compact = false;
  std::size_t n = next_pow2(static_cast<std::size_t>(std::ceil(2.0 * x_max / x_step)));
  GridFunction g(-x_max + 0.5, x_step, n);
  for (std::size_t i = 0; i < n; ++i)
    g.values[i] = phi(g.coord(i));
  fft_pow2(g.values, false);
  for (std::size_t b = 0; b < n; ++b) {
    double s = bin_frequency(b, n, x_step);
    g.values[b] *= std::pow(std::abs(s), sigma + tau) * half_axis_phase(s, sigma - tau);
    if (s == 0.0 && sigma + tau > 0.0)
      g.values[b] = 0.0;
  }
  fft_pow2(g.values, true);
  prof.x0 = g.origin;
  prof.dx = g.step;
  prof.table.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    prof.table[i] = g.values[i].real();
  return prof;
}

inline std::vector<ScaleProfile> build_profiles(const MultiscaleConfig& config,
                                                const ScaleLocationSet& set, StatisticMode mode,
                                                double step, std::vector<std::size_t>& scale_of_pair)
{
  std::map<long long, std::size_t> seen; // h in 1e-12 quanta -> profile index
  std::vector<ScaleProfile> profiles;
  scale_of_pair.resize(set.pairs.size());

  for (std::size_t p = 0; p < set.pairs.size(); ++p) {
    double h = set.pairs[p].h;
    long long key = static_cast<long long>(std::llround(h * 1e12));
    auto it = seen.find(key);
    if (it != seen.end()) {
      scale_of_pair[p] = it->second;
      continue;
    }

    ScaleProfile prof;
    prof.h = h;
    prof.w = scale_weight(h, config.nu);
    prof.drift = scale_drift(h, config.nu);

    if (mode == StatisticMode::principal) {
      SigmaTau st = config.problem.principal_split();
      double total = config.problem.total_order();
      int ti = static_cast<int>(std::lround(total));
      bool integer_orders = std::abs(total - ti) < 1e-12 &&
                            std::abs(st.sigma - std::lround(st.sigma)) < 1e-12;
      prof.norm = std::sqrt(h) * fractional_derivative_norm(config.kernel, total);
      if (integer_orders && config.kernel.family == Kernel::Family::beta && config.kernel.k >= ti) {
        // D_+^sigma D_-^tau phi = (-1)^tau phi^(sigma+tau) for integer orders
        double sign = (std::lround(st.tau) % 2 == 0) ? 1.0 : -1.0;
        Polynomial px = config.kernel.poly.derivative(ti) * sign;
        std::size_t L = static_cast<std::size_t>(std::llround(h / step));
        prof.samples.resize(L);
        for (std::size_t i = 0; i < L; ++i)
          prof.samples[i] = px(static_cast<double>(i) * step / h);
      } else {
        prof = [&] {
          ScaleProfile sp = spread_profile_fractional(config.kernel, st.sigma, st.tau, step / h,
                                                      std::min(64.0, 2.2 / h + 2.0));
          sp.h = prof.h;
          sp.w = prof.w;
          sp.drift = prof.drift;
          sp.norm = prof.norm;
          return sp;
        }();
      }
    } else {
      if (auto v = closed_form_v(config.problem, config.kernel, 0.0, h)) {
        prof.norm = v->l2_norm();
        std::size_t L = static_cast<std::size_t>(std::llround(h / step));
        prof.samples.resize(L);
        for (std::size_t i = 0; i < L; ++i)
          prof.samples[i] = v->px(static_cast<double>(i) * step / h);
      } else {
        if (config.problem.op.form == OperatorSpec::Form::variable_coeff)
          throw config_error("simulate_statistic: variable-coefficient operators need per-pair "
                             "profiles; use a custom set with one scale per pair");
        GridFunction vg = v_fourier(config.problem, config.kernel, 0.0, h, step);
        prof.compact = false;
        prof.x0 = vg.origin;
        prof.dx = vg.step;
        prof.table.resize(vg.size());
        for (std::size_t i = 0; i < vg.size(); ++i)
          prof.table[i] = vg.values[i].real();
        prof.norm = std::sqrt(vg.l2_norm_sq());
      }
    }
    profiles.push_back(std::move(prof));
    seen.emplace(key, profiles.size() - 1);
    scale_of_pair[p] = profiles.size() - 1;
  }
  return profiles;
}

} // namespace detail

//! Monte-Carlo replications of the distribution-free approximating statistic
//!
//!   sup over (t,h) of w_h ( |sum psi_{t,h}(s_j) dW_j| / V_{t,h} - sqrt(2 log nu/h) ),
//!
//! with psi = Re v_{t,h} (general mode) or D_+^sigma D_-^tau phi((.-t)/h)
//! (principal mode). One shared noise grid per replication couples all pairs;
//! this coupling determines the law of the supremum and must not be replaced
//! by independent draws. Deterministic given the seed, independent of the
//! worker count (per-replication substreams).
inline std::vector<double> simulate_statistic(const MultiscaleConfig& config,
                                              const ScaleLocationSet& set, StatisticMode mode,
                                              const SimOptions& opts)
{
  config.validate();
  set.validate();
  const double min_h = set.min_scale();
  double step = opts.grid_step > 0.0 ? opts.grid_step : min_h / 16.0;
  if (step > min_h / 16.0 + 1e-15)
    throw resolution_error("simulate_statistic: noise step too coarse (need step <= min h / 16)");

  std::vector<std::size_t> scale_of_pair;
  std::vector<detail::ScaleProfile> profiles =
      detail::build_profiles(config, set, mode, step, scale_of_pair);

  const std::size_t grid_count =
      static_cast<std::size_t>(std::ceil((opts.span_hi - opts.span_lo) / step));
  const double origin = opts.span_lo;

  // Grid offsets per pair; -1 marks pairs whose t is off-grid (slow path).
  std::vector<long long> offset_of_pair(set.pairs.size());
  for (std::size_t p = 0; p < set.pairs.size(); ++p) {
    double u = (set.pairs[p].t - origin) / step;
    long long i = std::llround(u);
    offset_of_pair[p] = (std::abs(u - static_cast<double>(i)) < 1e-9) ? i : -1;
  }

  std::vector<double> result(opts.reps);
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = opts.workers > 0 ? static_cast<std::size_t>(opts.workers)
                                         : std::max(1u, hw);
  workers = std::min<std::size_t>(workers, std::max<std::size_t>(1, opts.reps));

  auto run = [&](std::size_t first) {
    NoiseGrid noise;
    noise.origin = origin;
    noise.step = step;
    noise.increments.resize(grid_count);
    for (std::size_t r = first; r < opts.reps; r += workers) {
      Rng rng = Rng::substream(opts.seed, r);
      noise.fill(rng);
      const double* dw = noise.increments.data();

      double sup = -std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < set.pairs.size(); ++p) {
        const auto& prof = profiles[scale_of_pair[p]];
        const double t = set.pairs[p].t;
        double dot = 0.0;
        if (prof.compact) {
          long long off = offset_of_pair[p];
          if (off >= 0) {
            const double* k = prof.samples.data();
            const double* w = dw + static_cast<std::size_t>(off);
            const std::size_t L = prof.samples.size();
            // Four fixed accumulators: deterministic reassociation, lets the
            // compiler vectorize the reduction without -ffast-math.
            double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
            std::size_t i = 0;
            for (; i + 4 <= L; i += 4) {
              a0 += k[i] * w[i];
              a1 += k[i + 1] * w[i + 1];
              a2 += k[i + 2] * w[i + 2];
              a3 += k[i + 3] * w[i + 3];
            }
            for (; i < L; ++i)
              a0 += k[i] * w[i];
            dot = (a0 + a1) + (a2 + a3);
          } else {
            for (std::size_t j = 0; j < grid_count; ++j) {
              double x = (origin + step * static_cast<double>(j) - t) / prof.h;
              if (x >= 0.0 && x < 1.0)
                dot += prof.samples[static_cast<std::size_t>(x * static_cast<double>(prof.samples.size()))] * dw[j];
            }
          }
        } else {
          for (std::size_t j = 0; j < grid_count; ++j) {
            double x = (origin + step * static_cast<double>(j) - t) / prof.h;
            dot += prof.eval_x(x) * dw[j];
          }
        }
        double val = prof.w * (std::abs(dot) / prof.norm - prof.drift);
        sup = std::max(sup, val);
      }
      result[r] = sup;
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back(run, w);
    for (auto& th : pool)
      th.join();
  }
  return result;
}

//! Signed normalized ratios (integral psi dW) / V of a single pair; used by
//! the marginal-normality and exchangeability diagnostics.
inline std::vector<double> simulate_pair_ratios(const MultiscaleConfig& config, ScaleLocation pair,
                                                StatisticMode mode, const SimOptions& opts)
{
  ScaleLocationSet set = custom_set({ pair });
  double step = opts.grid_step > 0.0 ? opts.grid_step : pair.h / 16.0;
  std::vector<std::size_t> scale_of_pair;
  auto profiles = detail::build_profiles(config, set, mode, step, scale_of_pair);
  const auto& prof = profiles[0];

  const std::size_t grid_count =
      static_cast<std::size_t>(std::ceil((opts.span_hi - opts.span_lo) / step));
  std::vector<double> out(opts.reps);
  NoiseGrid noise;
  noise.origin = opts.span_lo;
  noise.step = step;
  noise.increments.resize(grid_count);
  for (std::size_t r = 0; r < opts.reps; ++r) {
    Rng rng = Rng::substream(opts.seed, r);
    noise.fill(rng);
    double dot = 0.0;
    for (std::size_t j = 0; j < grid_count; ++j) {
      double x = (noise.origin + step * static_cast<double>(j) - pair.t) / prof.h;
      if (prof.compact) {
        if (x >= 0.0 && x < 1.0)
          dot += prof.samples[static_cast<std::size_t>(x * static_cast<double>(prof.samples.size()))] *
                 noise.increments[j];
      } else {
        dot += prof.eval_x(x) * noise.increments[j];
      }
    }
    out[r] = dot / prof.norm;
  }
  return out;
}

//! Validates the white-noise discretization: relative gap between the MC
//! variance of sum psi(s_j) dW_j and the quadrature norm ||psi||_2^2.
inline double variance_check(const GridFunction& psi, std::size_t reps = 10000,
                             std::uint64_t seed = 7)
{
  double target = psi.l2_norm_sq();
  if (target <= 0.0)
    throw config_error("variance_check: zero test function");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng = Rng::substream(seed, r);
    double sd = std::sqrt(psi.step);
    double dot = 0.0;
    for (const auto& v : psi.values)
      dot += v.real() * (sd * rng.normal());
    double delta = dot - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (dot - mean);
  }
  double var = m2 / static_cast<double>(reps - 1);
  return std::abs(var / target - 1.0);
}

//! Empirical (1-alpha)-quantile by the nearest-rank rule, with an
//! order-statistic standard error based on a density estimate at the
//! quantile.
inline QuantileEstimate quantile(std::vector<double> samples, double alpha)
{
  if (samples.empty())
    throw config_error("quantile: empty sample");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("quantile: alpha must lie in (0,1)");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n)));
  rank = std::min(std::max<std::size_t>(rank, 1), n);

  QuantileEstimate est;
  est.alpha = alpha;
  est.reps = n;
  est.value = samples[rank - 1];

  // Binomial order-statistic error: sqrt(alpha(1-alpha)/n) / f_hat(q).
  double lo = samples.front(), hi = samples.back();
  if (hi > lo) {
    double mean = 0.0;
    for (double x : samples)
      mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : samples)
      var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    double bw = 1.06 * std::sqrt(var) * std::pow(static_cast<double>(n), -0.2);
    if (bw > 0.0) {
      double dens = 0.0;
      for (double x : samples) {
        double z = (est.value - x) / bw;
        dens += std::exp(-0.5 * z * z);
      }
      dens /= static_cast<double>(n) * bw * 2.5066282746310005024;
      if (dens > 0.0)
        est.mc_stderr = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n)) / dens;
    }
  }
  return est;
}

} // namespace msdecon
