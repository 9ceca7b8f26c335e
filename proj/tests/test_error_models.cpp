#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "msdecon/error_models.hpp"
#include "msdecon/rng.hpp"

using namespace msdecon;

TEST_CASE("characteristic functions of the builtins")
{
  ErrorModel lap = ErrorModel::laplace(0.075);
  CHECK(lap.cf(0.0) == cplx(1.0, 0.0));
  CHECK(lap.cf(3.0).real() == doctest::Approx(1.0 / (1.0 + 0.075 * 0.075 * 9.0)).epsilon(1e-15));
  CHECK(lap.cf(3.0).imag() == 0.0);

  ErrorModel gam = ErrorModel::gamma(2.0, 0.3);
  cplx expected = std::pow(cplx(1.0, 0.3 * 5.0), -2.0);
  CHECK(std::abs(gam.cf(5.0) - expected) < 1e-14);

  CHECK(ErrorModel::none().cf(17.0) == cplx(1.0, 0.0));
  CHECK(std::abs(ErrorModel::exponential(0.4).cf(2.0) - 1.0 / cplx(1.0, 0.8)) < 1e-14);

  // |cf| <= 1 everywhere
  for (double s = -50.0; s <= 50.0; s += 0.7) {
    CHECK(std::abs(lap.cf(s)) <= 1.0 + 1e-12);
    CHECK(std::abs(gam.cf(s)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("inversion multiplier")
{
  ErrorModel none = ErrorModel::none();
  CHECK(none.inversion_multiplier(4.2) == cplx(1.0, 0.0));

  ErrorModel lap = ErrorModel::laplace(0.075);
  CHECK(lap.inversion_multiplier(10.0).real() == doctest::Approx(1.5625).epsilon(1e-15));

  ErrorModel gam = ErrorModel::gamma(2.0, 0.3);
  cplx expected = std::pow(cplx(1.0, -0.3 * 5.0), 2.0); // (1 - i theta s)^2
  CHECK(std::abs(gam.inversion_multiplier(5.0) - expected) < 1e-13);

  // multiplier * cf(-s) = 1 on random frequencies for every builtin
  Rng rng(99);
  for (const ErrorModel& m : { ErrorModel::laplace(0.2), ErrorModel::gamma(3.0, 0.1),
                               ErrorModel::exponential(0.5), ErrorModel::none() }) {
    for (int i = 0; i < 1000; ++i) {
      double s = (rng.uniform() - 0.5) * 200.0;
      CHECK(std::abs(m.inversion_multiplier(s) * m.cf(-s) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("principal constants")
{
  PrincipalConstants lap = ErrorModel::laplace(0.075).principal_constants();
  CHECK(lap.A == doctest::Approx(0.005625).epsilon(1e-15));
  CHECK(lap.rho == 0.0);
  CHECK(lap.r == 2.0);

  PrincipalConstants expo = ErrorModel::exponential(0.4).principal_constants();
  CHECK(expo.A == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(expo.rho == 1.0);
  CHECK(expo.r == 1.0);

  PrincipalConstants gam = ErrorModel::gamma(6.0, 0.5).principal_constants();
  CHECK(gam.A == doctest::Approx(std::pow(0.5, 6.0)).epsilon(1e-14));
  CHECK(gam.rho == 2.0); // 6 mod 4

  PrincipalConstants idn = ErrorModel::none().principal_constants();
  CHECK(idn.A == 1.0);
  CHECK(idn.rho == 0.0);
  CHECK(idn.r == 0.0);

  ErrorModel custom = ErrorModel::custom([](double s) { return cplx(1.0 / (1.0 + s * s), 0.0); },
                                         2.0, 0.5, 1.0);
  CHECK_THROWS_AS(custom.principal_constants(), config_error);
  CHECK(custom.has_principal() == false);
}

TEST_CASE("sampling moments")
{
  const std::size_t n = 100000;

  auto mean_of = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
      m += x;
    return m / static_cast<double>(v.size());
  };

  // none: identically zero
  std::vector<double> zeros = ErrorModel::none().sample(5, 1);
  for (double z : zeros)
    CHECK(z == 0.0);

  // laplace: mean within 4 standard errors of 0 (variance 2 theta^2)
  double theta = 0.5;
  std::vector<double> lap = ErrorModel::laplace(theta).sample(n, 12345);
  CHECK(std::abs(mean_of(lap)) < 4.0 * std::sqrt(2.0 * theta * theta / n));

  // gamma(2, theta): mean within 4 SE of 2 theta
  std::vector<double> gam = ErrorModel::gamma(2.0, 0.3).sample(n, 777);
  CHECK(std::abs(mean_of(gam) - 0.6) < 4.0 * std::sqrt(2.0 * 0.09 / n));

  // determinism
  CHECK(ErrorModel::laplace(theta).sample(16, 5) == ErrorModel::laplace(theta).sample(16, 5));
}

TEST_CASE("empirical characteristic function converges to cf")
{
  // 10^6 draws, linear-binned, sup over s in [-20, 20]
  const std::size_t n = 1000000;
  ErrorModel model = ErrorModel::laplace(0.2);
  std::vector<double> sample = model.sample(n, 2024);

  double lo = sample[0], hi = sample[0];
  for (double x : sample) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const int bins = 1 << 14;
  std::vector<double> count(bins + 1, 0.0);
  double width = (hi - lo) / bins;
  for (double x : sample) {
    double u = (x - lo) / width;
    int b = std::min(bins - 1, static_cast<int>(u));
    double frac = u - b;
    count[b] += 1.0 - frac;
    count[b + 1] += frac;
  }

  double sup = 0.0;
  for (int i = -40; i <= 40; ++i) {
    double s = i * 0.5;
    cplx acc(0.0, 0.0);
    for (int b = 0; b <= bins; ++b) {
      if (count[b] == 0.0)
        continue;
      double y = lo + b * width;
      acc += count[b] * cplx(std::cos(s * y), -std::sin(s * y));
    }
    acc /= static_cast<double>(n);
    sup = std::max(sup, std::abs(acc - model.cf(s)));
  }
  CHECK(sup < 5e-3);
}

TEST_CASE("characteristic functions respect their documented decay envelopes")
{
  // C_l <s>^{-r} <= |cf(s)| <= C_u <s>^{-r} on a log-spaced grid to |s| = 1e6
  for (const ErrorModel& m : { ErrorModel::laplace(0.075), ErrorModel::laplace(2.5),
                               ErrorModel::gamma(2.0, 0.3), ErrorModel::exponential(0.7),
                               ErrorModel::none() }) {
    AssumptionReport rep = validate_assumptions(m, 1e6, 600);
    CHECK(rep.inf_scaled_cf >= m.c_lower() * (1.0 - 1e-9));
    CHECK(rep.sup_scaled_cf <= m.c_upper() * (1.0 + 1e-9));
  }
}

TEST_CASE("assumption audit on the builtins")
{
  AssumptionReport lap = validate_assumptions(ErrorModel::laplace(0.075), 1e6, 400);
  CHECK(!lap.violation);
  CHECK(lap.inf_scaled_cf > 0.0);
  CHECK(std::isfinite(lap.sup_residual));

  AssumptionReport idn = validate_assumptions(ErrorModel::none(), 1e6, 200);
  CHECK(!idn.violation);
  CHECK(idn.sup_residual == 0.0);
  CHECK(idn.sup_scaled_cf == doctest::Approx(1.0));
  CHECK(idn.inf_scaled_cf == doctest::Approx(1.0));

  // gamma(3,1): |cf(s)| <s>^3 = 1 identically
  AssumptionReport gam = validate_assumptions(ErrorModel::gamma(3.0, 1.0), 1e6, 400);
  CHECK(gam.sup_scaled_cf == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(gam.inf_scaled_cf == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(!gam.violation);

  AssumptionReport expo = validate_assumptions(ErrorModel::exponential(0.3), 1e6, 400);
  CHECK(!expo.violation);
}

TEST_CASE("model construction guards")
{
  CHECK_THROWS_AS(ErrorModel::laplace(0.0), config_error);
  CHECK_THROWS_AS(ErrorModel::gamma(-1.0, 0.5), config_error);
  CHECK_THROWS_AS(ErrorModel::custom([](double) { return cplx(0.5, 0.0); }, 1.0, 0.1, 1.0),
                  config_error); // cf(0) != 1
  CHECK_THROWS_AS(ErrorModel::custom(nullptr, 1.0, 0.1, 1.0), config_error);
}

TEST_CASE("density sup norms")
{
  CHECK(ErrorModel::laplace(0.075).density_sup() == doctest::Approx(1.0 / 0.15).epsilon(1e-15));
  CHECK(ErrorModel::exponential(0.4).density_sup() == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(ErrorModel::none().density_sup(), config_error);
}
