#pragma once

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "msdecon/gaussian_sim.hpp"
#include "msdecon/inference.hpp"
#include "msdecon/mixture.hpp"
#include "msdecon/scenario.hpp"

namespace msdecon {

//! The Laplace-deconvolution monotonicity benchmark: theta = 0.075, Beta(4,4)
//! kernel, principal mode, triangular set with N = floor(n^{3/5}) and
//! u = 1/log log n, nu = exp(e^2).
inline Scenario benchmark_scenario(std::size_t n, std::size_t reps = 10000, std::uint64_t seed = 20240901)
{
  Scenario s;
  s.n = n;
  s.error_name = "laplace";
  s.error_theta = 0.075;
  s.op_form = "derivative";
  s.op_order = 1;
  s.kernel_k = 3;
  s.nu = default_nu();
  s.alpha = 0.1;
  s.set_kind = "triangular_auto";
  s.seed = seed;
  s.reps = reps;
  s.mode = "principal";
  return s;
}

//! Synthetic trimodal truth used by the coverage experiments: three
//! well-separated beta bumps with modes near 0.2, 0.5 and 0.8.
inline MixtureDensity trimodal_density()
{
  return MixtureDensity({ { MixtureComponent::Type::beta, 7.0, 25.0, 0.35 },
                          { MixtureComponent::Type::beta, 16.0, 16.0, 0.30 },
                          { MixtureComponent::Type::beta, 25.0, 7.0, 0.35 } });
}

struct CoverageResult {
  int reps = 0;
  int all_covered = 0;     //!< replications where every rectangle covers op(p)f
  int artefact_ok = 0;     //!< replications with mode bound <= true mode count
  int both_signs = 0;      //!< replications detecting an increase and a decrease
  double coverage_fraction() const { return static_cast<double>(all_covered) / reps; }
  double artefact_fraction() const { return static_cast<double>(artefact_ok) / reps; }
  double both_signs_fraction() const { return static_cast<double>(both_signs) / reps; }
};

//! Full-pipeline coverage experiment: synthesize data from a known trimodal
//! density under Laplace noise, run the general-mode analysis at level alpha,
//! and check the simultaneous coverage guarantee against the true f'.
inline CoverageResult coverage_experiment(std::size_t n, double alpha, int replications,
                                          std::uint64_t seed, int workers = 0,
                                          std::size_t calibration_reps = 3000,
                                          int true_mode_count = 3)
{
  const double theta = 0.075;
  MixtureDensity truth = trimodal_density();
  ErrorModel noise = ErrorModel::laplace(theta);
  ProblemSpec problem(OperatorSpec::derivative(1), noise);
  Kernel kernel = make_beta_kernel(3);

  ScaleLocationSet set = triangular_set(triangular_resolution(n), default_max_scale(n));
  MultiscaleConfig config(kernel, problem);
  config.alpha = alpha;
  config.mode = StatisticMode::general;

  SimOptions sim;
  sim.reps = calibration_reps;
  sim.seed = seed ^ 0x5ca1ab1eULL;
  sim.workers = workers;
  std::vector<double> null_samples = simulate_statistic(config, set, StatisticMode::general, sim);
  const double q_alpha = quantile(null_samples, alpha).value;

  // True f' on a fine grid for fast range queries inside every rectangle.
  const int G = 8192;
  std::vector<double> fprime(G + 1);
  for (int i = 0; i <= G; ++i)
    fprime[i] = truth.dpdf(static_cast<double>(i) / G);

  CoverageResult result;
  result.reps = replications;
  for (int rep = 0; rep < replications; ++rep) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(rep) + 1);
    std::vector<double> data = truth.sample(n, rng);
    for (auto& y : data)
      y += rng.laplace(theta);

    StatisticTable table = statistics_over_set(data, set, config);
    std::vector<ConfidenceRectangle> rects = rectangles(table, q_alpha, n, config.nu);

    bool all_cov = true;
    for (const auto& r : rects) {
      int lo = static_cast<int>(std::floor(r.t * G));
      int hi = static_cast<int>(std::ceil((r.t + r.h) * G));
      lo = std::max(lo, 0);
      hi = std::min(hi, G);
      double mn = fprime[lo], mx = fprime[lo];
      for (int i = lo + 1; i <= hi; ++i) {
        mn = std::min(mn, fprime[i]);
        mx = std::max(mx, fprime[i]);
      }
      if (!(mn <= r.b_plus && mx >= r.b_minus)) {
        all_cov = false;
        break;
      }
    }
    if (all_cov)
      ++result.all_covered;

    QualitativeReport report = extract_report(rects, alpha);
    if (report.mode_count_lower_bound <= true_mode_count)
      ++result.artefact_ok;
    if (!report.increases.empty() && !report.decreases.empty())
      ++result.both_signs;
  }
  return result;
}

//! Five-number summary used by the boxplot reproduction.
struct FiveNumberSummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

inline FiveNumberSummary five_number_summary(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    std::size_t r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
    r = std::min(std::max<std::size_t>(r, 1), v.size());
    return v[r - 1];
  };
  return { v.front(), at(0.25), at(0.5), at(0.75), v.back() };
}

} // namespace msdecon
