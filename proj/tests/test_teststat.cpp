#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "msdecon/index_set.hpp"
#include "msdecon/mixture.hpp"
#include "msdecon/teststat.hpp"

using namespace msdecon;

TEST_CASE("index sets")
{
  // triangular(N=4, u=0.5): exactly the 7 pairs of the definition
  ScaleLocationSet tri = triangular_set(4, 0.5);
  REQUIRE(tri.pairs.size() == 7);
  std::vector<std::pair<double, double>> expected = { { 0.0, 0.25 },  { 0.25, 0.25 }, { 0.5, 0.25 },
                                                      { 0.75, 0.25 }, { 0.0, 0.5 },   { 0.25, 0.5 },
                                                      { 0.5, 0.5 } };
  for (const auto& [t, h] : expected) {
    bool found = false;
    for (const auto& p : tri.pairs)
      found = found || (p.t == t && p.h == h);
    CHECK(found);
  }

  ScaleLocationSet circ = circle_set(2);
  REQUIRE(circ.pairs.size() == 2);
  CHECK(circ.pairs[0].t == 0.0);
  CHECK(circ.pairs[0].h == 0.5);
  CHECK(circ.pairs[1].t == 0.5);

  ScaleLocationSet dy = dyadic_set(1, 2);
  CHECK(dy.pairs.size() == 2 + 4);

  // sample-size driven resolution: N = floor(n^{3/5})
  CHECK(triangular_resolution(2000) == 95);
  CHECK(triangular_resolution(10000) == 251);
  CHECK(triangular_resolution(200) == 24);
  CHECK(static_cast<int>(std::floor(251 * default_max_scale(10000))) == 113);

  CHECK_THROWS_AS(triangular_set(1, 0.5), config_error);
  CHECK_THROWS_AS(circle_set(0), config_error);
  CHECK_THROWS_AS(custom_set({ { 0.5, 1.5 } }), config_error);
}

TEST_CASE("scale weights")
{
  const double nu = default_nu();
  // w_1 = sqrt(e^2/2)/log(e^2) = e/(2 sqrt 2)
  CHECK(scale_weight(1.0, nu) ==
        doctest::Approx(std::exp(1.0) / (2.0 * std::sqrt(2.0))).epsilon(1e-14));

  // strict monotonicity of w_h on (0, nu e^{-e^2}] and of w_h sqrt(h) on (0,1]
  for (double nu_test : { std::exp(1.0) + 0.01, nu }) {
    double upper = std::min(1.0, nu_test * std::exp(-std::exp(2.0)));
    double prev_w = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 10000; ++i) {
      double h = upper * i / 10000.0;
      double w = scale_weight(h, nu_test);
      CHECK(w < prev_w);
      prev_w = w;
    }
    double prev_ws = 0.0;
    for (int i = 1; i <= 10000; ++i) {
      double h = static_cast<double>(i) / 10000.0;
      double ws = scale_weight(h, nu_test) * std::sqrt(h);
      CHECK(ws > prev_ws);
      prev_ws = ws;
    }
  }
}

TEST_CASE("closed-form test function for Laplace + monotonicity")
{
  double theta = 0.075;
  Kernel phi = make_beta_kernel(3);
  LocalTestFunction v = v_closed_form_laplace_D(theta, phi, 0.4, 0.2);

  // compact support
  CHECK(v(0.39) == 0.0);
  CHECK(v(0.61) == 0.0);

  // frozen evaluation at y = 0.45 (x = 1/4): exact dyadic arithmetic
  CHECK(v(0.45) == doctest::Approx(-295.3125).epsilon(1e-13));
  // the symmetric midpoint is a double zero of both derivative terms
  CHECK(v(0.5) == doctest::Approx(0.0));

  // theta = 0: the direct-problem statistic -h^{-1} phi'((y-t)/h)
  LocalTestFunction v0 = v_closed_form_laplace_D(0.0, phi, 0.4, 0.2);
  for (double y : { 0.42, 0.47, 0.55 })
    CHECK(v0(y) == doctest::Approx(-5.0 * phi.poly.derivative()((y - 0.4) / 0.2)).epsilon(1e-12));

  // matches the generic closed-form route
  ProblemSpec lapD(OperatorSpec::derivative(1), ErrorModel::laplace(theta));
  auto generic = closed_form_v(lapD, phi, 0.4, 0.2);
  REQUIRE(generic.has_value());
  for (double y : { 0.41, 0.45, 0.52, 0.59 })
    CHECK(generic->operator()(y) == doctest::Approx(v(y)).epsilon(1e-12));

  CHECK_THROWS_AS(v_closed_form_laplace_D(theta, make_beta_kernel(1), 0.4, 0.2), config_error);
}

TEST_CASE("closed form for gamma noise and the direct problem")
{
  Kernel phi = make_beta_kernel(4);
  // exponential noise + identity: v = phi - theta phi' (scaled)
  ProblemSpec expI(OperatorSpec::identity(), ErrorModel::exponential(0.3));
  auto v = closed_form_v(expI, phi, 0.0, 1.0);
  REQUIRE(v.has_value());
  for (double y : { 0.2, 0.5, 0.8 })
    CHECK((*v)(y) == doctest::Approx(phi(y) - 0.3 * phi.poly.derivative()(y)).epsilon(1e-12));

  // epsilon = 0 + identity: v = phi((.-t)/h)
  ProblemSpec idn(OperatorSpec::identity(), ErrorModel::none());
  auto vi = closed_form_v(idn, phi, 0.25, 0.5);
  REQUIRE(vi.has_value());
  CHECK((*vi)(0.5) == doctest::Approx(phi(0.5)).epsilon(1e-14));

  // no closed form for fractional orders
  ProblemSpec wick(OperatorSpec::fractional(1.5, -1.5), ErrorModel::none());
  CHECK(!closed_form_v(wick, phi, 0.0, 0.5).has_value());
}

TEST_CASE("v_fourier agrees with the closed form (smooth kernel)")
{
  double theta = 0.075;
  ProblemSpec lapD(OperatorSpec::derivative(1), ErrorModel::laplace(theta));
  Kernel phi = make_beta_kernel(6);

  for (double h : { 1.0 / 16.0, 1.0 / 64.0 }) {
    double t = 0.4;
    GridFunction vf = v_fourier(lapD, phi, t, h, h / 64.0);
    LocalTestFunction vc = v_closed_form_laplace_D(theta, phi, t, h);
    double sup_v = 0.0, sup_err = 0.0;
    for (double u = t - 1.0; u <= t + 1.0; u += h / 64.0) {
      sup_v = std::max(sup_v, std::abs(vc(u)));
      sup_err = std::max(sup_err, std::abs(vf.interp_real(u) - vc(u)));
    }
    CHECK(sup_err <= 1e-3 * sup_v);
    // reality of the Fourier path
    CHECK(vf.max_imag_abs() <= 1e-9 * vf.max_abs());
  }
}

TEST_CASE("v_fourier: three operator routes agree for Laplace + D")
{
  // The same problem expressed three ways: the fractional-factor route
  // (derivative form, symbol in lambda), a pure Fourier multiplier i xi and
  // a variable-coefficient operator with a_1 = 1. All must reproduce the
  // Laplace closed form.
  double theta = 0.075;
  Kernel phi = make_beta_kernel(6);
  double t = 0.3, h = 1.0 / 16.0;
  LocalTestFunction vc = v_closed_form_laplace_D(theta, phi, t, h);
  double sup_v = 0.0;
  for (double u = t - 0.5; u <= t + 0.5; u += h / 64.0)
    sup_v = std::max(sup_v, std::abs(vc(u)));

  ErrorModel lap = ErrorModel::laplace(theta);
  OperatorSpec routes[] = {
    OperatorSpec::derivative(1),
    OperatorSpec::multiplier([](double xi) { return cplx(0.0, xi); }, 1.0, 1.0),
    OperatorSpec::variable_coeff({ Polynomial(), Polynomial({ 1.0 }) }),
  };
  for (const auto& op : routes) {
    ProblemSpec spec(op, lap);
    GridFunction vf = v_fourier(spec, phi, t, h, h / 64.0);
    double sup_err = 0.0;
    for (double u = t - 0.5; u <= t + 0.5; u += h / 64.0)
      sup_err = std::max(sup_err, std::abs(vf.interp_real(u) - vc(u)));
    CHECK(sup_err <= 2e-3 * sup_v);
  }
}

TEST_CASE("statistics_over_set falls back to the Fourier path for multiplier forms")
{
  double theta = 0.075;
  Kernel phi = make_beta_kernel(6);
  ScaleLocationSet set = custom_set({ { 0.3, 0.25 }, { 0.5, 0.25 } });

  std::vector<double> data;
  Rng rng(64);
  for (int i = 0; i < 200; ++i)
    data.push_back(0.2 + 0.6 * rng.uniform());

  MultiscaleConfig closed_cfg(phi, ProblemSpec(OperatorSpec::derivative(1), ErrorModel::laplace(theta)));
  closed_cfg.mode = StatisticMode::general;
  closed_cfg.grid_step = 0.25 / 256.0;
  MultiscaleConfig mult_cfg(phi,
                            ProblemSpec(OperatorSpec::multiplier([](double xi) { return cplx(0.0, xi); },
                                                                 1.0, 1.0),
                                        ErrorModel::laplace(theta)));
  mult_cfg.mode = StatisticMode::general;
  mult_cfg.grid_step = 0.25 / 256.0;

  StatisticTable a = statistics_over_set(data, set, closed_cfg);
  StatisticTable b = statistics_over_set(data, set, mult_cfg);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    // the Fourier path evaluates data through linear interpolation on the
    // grid; per-datum O(step^2) errors aggregate below half a percent here
    CHECK(b.rows[i].T == doctest::Approx(a.rows[i].T).epsilon(5e-3));
    CHECK(b.rows[i].V == doctest::Approx(a.rows[i].V).epsilon(1e-3));
  }
}

TEST_CASE("v_fourier: direct problem with identity operator returns the kernel")
{
  ProblemSpec idn(OperatorSpec::identity(), ErrorModel::none());
  Kernel phi = make_beta_kernel(3);
  GridFunction v = v_fourier(idn, phi, 0.3, 0.25, 0.25 / 64.0);
  // agreement at the grid samples is pure FFT round-off
  double sup = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    sup = std::max(sup, std::abs(v.values[i].real() - phi((v.coord(i) - 0.3) / 0.25)));
  CHECK(sup < 1e-10);
}

TEST_CASE("v_fourier: Wicksell-type fractional operator decay envelope")
{
  // |v(u)| <= C h^{2-m-r} / (u-t)^2 away from the window; the fitted C must
  // be stable across scales.
  ProblemSpec wick(OperatorSpec::fractional(1.5, -1.5), ErrorModel::none());
  Kernel phi = make_beta_kernel(4);
  double t = 0.5;
  std::vector<double> fitted;
  for (double h : { 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0 }) {
    GridFunction v = v_fourier(wick, phi, t, h, h / 64.0);
    double C = 0.0;
    for (double u = t + 2.0 * h; u <= t + 4.0; u += 0.01) {
      double envelope = std::pow(h, 2.0 - 1.5) / ((u - t) * (u - t));
      C = std::max(C, std::abs(v.interp_real(u)) / envelope);
    }
    for (double u = t - 2.0 * h; u >= t - 4.0; u -= 0.01) {
      double envelope = std::pow(h, 2.0 - 1.5) / ((u - t) * (u - t));
      C = std::max(C, std::abs(v.interp_real(u)) / envelope);
    }
    fitted.push_back(C);
  }
  double cmin = *std::min_element(fitted.begin(), fitted.end());
  double cmax = *std::max_element(fitted.begin(), fitted.end());
  CHECK(cmax / cmin < 2.5);
}

TEST_CASE("v_fourier input validation")
{
  ProblemSpec lapD(OperatorSpec::derivative(1), ErrorModel::laplace(0.075));
  Kernel phi = make_beta_kernel(3);
  CHECK_THROWS_AS(v_fourier(lapD, phi, 0.4, 0.2, 0.2 / 64.0, 2.0), config_error);
  CHECK_THROWS_AS(v_fourier(lapD, phi, 0.4, 0.2, 0.5), config_error);
}

TEST_CASE("pilot density")
{
  Rng rng(31);
  // uniform data: ghat(0.5) close to 1
  std::vector<double> unif(100000);
  for (auto& x : unif)
    x = rng.uniform();
  PilotDensity g1 = pilot_density(unif);
  CHECK(g1(0.5) > 0.95);
  CHECK(g1(0.5) < 1.05);
  // far from the data the estimate is clipped at the floor, never 0
  CHECK(g1(25.0) == doctest::Approx(0.05));

  // standard normal data: ghat(0) within 0.03 of 1/sqrt(2 pi)
  std::vector<double> norm(100000);
  for (auto& x : norm)
    x = rng.normal();
  PilotDensity g2 = pilot_density(norm, 0.0, 0.001);
  CHECK(std::abs(g2(0.0) - 0.3989422804014327) < 0.03);

  CHECK_THROWS_AS(pilot_density({}), config_error);
  CHECK_THROWS_AS(pilot_density(std::vector<double>(10, 0.7)), config_error); // zero variance
}

TEST_CASE("statistics over the index set: frozen single-datum values")
{
  ProblemSpec lapD(OperatorSpec::derivative(1), ErrorModel::laplace(0.075));
  MultiscaleConfig config(make_beta_kernel(3), lapD);
  config.mode = StatisticMode::principal;
  config.pilot_bandwidth = 0.1; // bypass Silverman for the tiny sample

  ScaleLocationSet set = custom_set({ { 0.4, 0.2 } });

  // n = 1, Y = 0.45: T = v_{0.4,0.2}(0.45) from the closed form
  StatisticTable t1 = statistics_over_set({ 0.45 }, set, config);
  REQUIRE(t1.rows.size() == 1);
  CHECK(t1.rows[0].T == doctest::Approx(-295.3125).epsilon(1e-13));
  // n = 1, Y = 0.5: both polynomial terms vanish at the midpoint
  StatisticTable t2 = statistics_over_set({ 0.5 }, set, config);
  CHECK(t2.rows[0].T == doctest::Approx(0.0));

  // V^P at h = 0.25: theta^2 * 0.25^{-5/2} * 120 sqrt(7)
  ScaleLocationSet set25 = custom_set({ { 0.4, 0.25 } });
  StatisticTable t3 = statistics_over_set({ 0.45 }, set25, config);
  CHECK(t3.rows[0].V == doctest::Approx(57.148228318995152).epsilon(1e-12));
  CHECK(t3.rows[0].w == doctest::Approx(scale_weight(0.25, config.nu)).epsilon(1e-15));
  CHECK(t3.rows[0].drift == doctest::Approx(4.1893556688470701).epsilon(1e-12));

  // resolution guard
  MultiscaleConfig coarse = config;
  coarse.grid_step = 0.1;
  CHECK_THROWS_AS(statistics_over_set({ 0.45 }, set, coarse), resolution_error);
}

TEST_CASE("statistics table is independent of the worker count")
{
  ProblemSpec lapD(OperatorSpec::derivative(1), ErrorModel::laplace(0.075));
  MultiscaleConfig config(make_beta_kernel(3), lapD);
  config.mode = StatisticMode::general;
  ScaleLocationSet set = triangular_set(20, 0.5);
  Rng rng(77);
  std::vector<double> data(500);
  for (auto& y : data)
    y = rng.uniform();
  StatisticTable serial = statistics_over_set(data, set, config, 1);
  StatisticTable parallel = statistics_over_set(data, set, config, 4);
  REQUIRE(serial.rows.size() == parallel.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].T == parallel.rows[i].T);
    CHECK(serial.rows[i].V == parallel.rows[i].V);
    CHECK(serial.rows[i].ghat == parallel.rows[i].ghat);
  }
}

TEST_CASE("custom polynomial kernels")
{
  // the beta polynomial re-wrapped as a custom kernel
  Kernel phi = custom_polynomial_kernel(make_beta_kernel(2).poly);
  CHECK(phi.family == Kernel::Family::custom_polynomial);
  CHECK(phi(0.5) == doctest::Approx(30.0 / 16.0));
  CHECK_THROWS_AS(custom_polynomial_kernel(Polynomial({ 2.0 })), config_error); // mass 2
  CHECK_THROWS_AS(custom_polynomial_kernel(Polynomial({ -0.5, 3.0 })), config_error); // negative
}

TEST_CASE("general-mode norm consistency with the principal norm")
{
  // quadrature ||v_{t,h}||_2 approaches h^{1/2-m-r} |A a_P| ||phi^(3)||_2 as h -> 0
  double theta = 0.075;
  ProblemSpec lapD(OperatorSpec::derivative(1), ErrorModel::laplace(theta));
  Kernel phi = make_beta_kernel(3);
  double h = 1.0 / 64.0;
  auto v = closed_form_v(lapD, phi, 0.0, h);
  REQUIRE(v.has_value());
  double general = v->l2_norm();
  double principal = std::pow(h, 0.5 - 3.0) * theta * theta * 120.0 * std::sqrt(7.0);
  CHECK(std::abs(general / principal - 1.0) < 0.05);
}

TEST_CASE("multiscale sup")
{
  StatisticTable table;
  StatisticRow row;
  row.t = 0.2;
  row.h = 0.25;
  row.V = 2.0;
  row.ghat = 1.44;
  row.w = scale_weight(0.25, default_nu());
  row.drift = scale_drift(0.25, default_nu());
  // T - E T = V sqrt(ghat) drift makes the statistic exactly zero
  row.T = 2.0 * 1.2 * row.drift;
  table.rows.push_back(row);
  CHECK(multiscale_sup(table, {}, default_nu()) == doctest::Approx(0.0).epsilon(1e-14));

  // sup over a superset dominates the subset
  StatisticRow extra = row;
  extra.T = 3.0 * row.T;
  table.rows.push_back(extra);
  CHECK(multiscale_sup(table, {}, default_nu()) >= 0.0);

  CHECK_THROWS_AS(multiscale_sup(table, { 1.0 }, default_nu()), config_error);
}

TEST_CASE("unbiasedness: E T_{t,h} matches the quadrature of sqrt(n)<phi, f'>")
{
  // small Monte-Carlo version of the acceptance criterion
  const std::size_t n = 500;
  const int reps = 400;
  const double theta = 0.075;
  MixtureDensity truth({ { MixtureComponent::Type::beta, 8.0, 20.0, 0.5 },
                         { MixtureComponent::Type::beta, 18.0, 9.0, 0.5 } });
  Kernel phi = make_beta_kernel(3);
  double t = 0.3, h = 0.2;
  LocalTestFunction v = v_closed_form_laplace_D(theta, phi, t, h);

  double mean = 0.0, m2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    Rng rng = Rng::substream(555, r);
    double T = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double y = truth.sample(rng) + rng.laplace(theta);
      T += v(y);
    }
    T /= std::sqrt(static_cast<double>(n));
    double delta = T - mean;
    mean += delta / (r + 1);
    m2 += delta * (T - mean);
  }
  double se = std::sqrt(m2 / (reps - 1.0) / reps);
  double oracle = expected_local_statistic(phi, t, h, [&](double x) { return truth.dpdf(x); }, n);
  CHECK(std::abs(mean - oracle) < 3.0 * se);
}
