#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace msdecon {

//! Deterministic, platform-independent random generator (xoshiro256++ with
//! splitmix64 seeding). The standard <random> distributions are not used
//! because their output differs between standard library implementations;
//! reproducibility of seeded runs is part of the CLI contract.
class Rng {
public:
  explicit Rng(std::uint64_t seed) { reseed(seed); }

  //! Independent substream for replication `stream`. Used to make parallel
  //! Monte-Carlo runs independent of the worker schedule.
  static Rng substream(std::uint64_t seed, std::uint64_t stream)
  {
    return Rng(splitmix(seed) ^ splitmix(stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t next_u64()
  {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  //! Uniform on (0,1); never returns 0 or 1.
  double uniform()
  {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  //! Standard normal via Box-Muller (pair cached).
  double normal()
  {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double exponential(double scale) { return -scale * std::log(uniform()); }

  double laplace(double scale)
  {
    double u = uniform();
    return u < 0.5 ? scale * std::log(2.0 * u) : -scale * std::log(2.0 * (1.0 - u));
  }

  //! Gamma(shape, scale) by Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape, double scale)
  {
    if (shape < 1.0) {
      double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0)
        continue;
      v = v * v * v;
      double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x)
        return scale * d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return scale * d * v;
    }
  }

  double beta(double a, double b)
  {
    double x = gamma(a, 1.0);
    double y = gamma(b, 1.0);
    return x / (x + y);
  }

private:
  void reseed(std::uint64_t seed)
  {
    std::uint64_t x = seed;
    for (auto& s : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      s = splitmix(x);
    }
    have_spare_ = false;
    spare_ = 0.0;
  }

  static std::uint64_t splitmix(std::uint64_t x)
  {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t rotl(std::uint64_t x, int k)
  {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace msdecon
