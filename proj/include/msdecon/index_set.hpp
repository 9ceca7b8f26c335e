#pragma once

#include <cmath>
#include <vector>

#include "msdecon/errors.hpp"

namespace msdecon {

struct ScaleLocation {
  double t = 0.0;
  double h = 0.0;
};

//! Finite set of scale-location pairs (t, h) over which the multiscale
//! statistic takes its supremum.
struct ScaleLocationSet {
  enum class Kind { triangular, circle, dyadic, custom };

  Kind kind = Kind::custom;
  std::vector<ScaleLocation> pairs;

  double min_scale() const
  {
    double m = 1.0;
    for (const auto& p : pairs)
      m = std::min(m, p.h);
    return m;
  }

  double max_scale() const
  {
    double m = 0.0;
    for (const auto& p : pairs)
      m = std::max(m, p.h);
    return m;
  }

  void validate() const
  {
    if (pairs.empty())
      throw config_error("ScaleLocationSet: empty index set");
    for (const auto& p : pairs) {
      if (p.t < 0.0 || p.t > 1.0 || p.h <= 0.0 || p.h > 1.0)
        throw config_error("ScaleLocationSet: pair outside [0,1] x (0,1]");
      if (kind != Kind::custom && p.t + p.h > 1.0 + 1e-9)
        throw config_error("ScaleLocationSet: window extends past 1");
    }
  }
};

//! { (k/N, l/N) : k >= 0, 1 <= l <= floor(N u), k + l <= N }.
inline ScaleLocationSet triangular_set(int N, double u)
{
  if (N < 2 || u <= 0.0 || u > 1.0)
    throw config_error("triangular_set: need N >= 2 and u in (0,1]");
  ScaleLocationSet set;
  set.kind = ScaleLocationSet::Kind::triangular;
  int lmax = static_cast<int>(std::floor(N * u));
  for (int l = 1; l <= lmax; ++l)
    for (int k = 0; k + l <= N; ++k)
      set.pairs.push_back({ static_cast<double>(k) / N, static_cast<double>(l) / N });
  set.validate();
  return set;
}

//! { (i/K, 1/K) : 0 <= i <= K-1 }: the finest-scale circle grid.
inline ScaleLocationSet circle_set(int K)
{
  if (K < 1)
    throw config_error("circle_set: need K >= 1");
  ScaleLocationSet set;
  set.kind = ScaleLocationSet::Kind::circle;
  for (int i = 0; i < K; ++i)
    set.pairs.push_back({ static_cast<double>(i) / K, 1.0 / K });
  set.validate();
  return set;
}

//! { (k 2^-j, 2^-j) : 0 <= k <= 2^j - 1, j0 <= j <= j1 }.
inline ScaleLocationSet dyadic_set(int j0, int j1)
{
  if (j0 > j1 || j0 < 0)
    throw config_error("dyadic_set: need 0 <= j0 <= j1");
  ScaleLocationSet set;
  set.kind = ScaleLocationSet::Kind::dyadic;
  for (int j = j0; j <= j1; ++j) {
    int K = 1 << j;
    for (int k = 0; k < K; ++k)
      set.pairs.push_back({ static_cast<double>(k) / K, 1.0 / K });
  }
  set.validate();
  return set;
}

inline ScaleLocationSet custom_set(std::vector<ScaleLocation> pairs)
{
  ScaleLocationSet set;
  set.kind = ScaleLocationSet::Kind::custom;
  set.pairs = std::move(pairs);
  set.validate();
  return set;
}

//! Sample-size-driven defaults of the triangular design: N_n = floor(n^{3/5}),
//! u_n = 1/log log n.
inline int triangular_resolution(std::size_t n)
{
  if (n < 16)
    throw config_error("triangular_resolution: sample size too small");
  return static_cast<int>(std::floor(std::pow(static_cast<double>(n), 0.6)));
}

inline double default_max_scale(std::size_t n)
{
  if (n < 16)
    throw config_error("default_max_scale: sample size too small");
  return 1.0 / std::log(std::log(static_cast<double>(n)));
}

} // namespace msdecon
