// Simulate the approximating statistic for the n = 10^4 benchmark and print
// its 90% quantile (a few seconds with all cores).

#include <iostream>

#include "msdecon/experiments.hpp"

int main()
{
  using namespace msdecon;

  Scenario s = benchmark_scenario(10000, 2000);
  SimOptions opts;
  opts.reps = s.reps;
  opts.seed = s.seed;
  auto samples = simulate_statistic(s.config(), s.index_set(), StatisticMode::principal, opts);
  QuantileEstimate est = quantile(samples, 0.1);
  std::cout << "q_0.1(T^{P,inf}) = " << est.value << " +- " << est.mc_stderr << " ("
            << est.reps << " reps)\n";
  return 0;
}
