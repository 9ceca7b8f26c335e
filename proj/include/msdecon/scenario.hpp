#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "msdecon/error_models.hpp"
#include "msdecon/errors.hpp"
#include "msdecon/index_set.hpp"
#include "msdecon/io.hpp"
#include "msdecon/kernels.hpp"
#include "msdecon/operators.hpp"
#include "msdecon/teststat.hpp"

namespace msdecon {

//! A fully specified experiment: sample size, error model, operator, kernel,
//! calibration constants and index set. Hashable so quantile tables can be
//! cached and later matched against an analysis run.
struct Scenario {
  std::size_t n = 10000;

  std::string error_name = "laplace"; // laplace | gamma | exponential | none
  double error_theta = 0.075;
  double error_r = 1.0; // gamma only

  std::string op_form = "derivative"; // derivative | fractional
  int op_order = 1;
  double op_coeff = 1.0;
  double op_gamma = 1.5; // fractional only
  double op_mu = -1.5;   // fractional only

  int kernel_k = 3;
  double nu = default_nu();
  double alpha = 0.1;

  std::string set_kind = "triangular_auto"; // triangular_auto | triangular | circle | dyadic
  int set_N = 0;
  double set_u = 0.0;
  int set_K = 64;
  int set_j0 = 2, set_j1 = 6;

  std::uint64_t seed = 1;
  std::size_t reps = 10000;
  std::string mode = "principal"; // principal | general

  static Scenario from_json(const nlohmann::json& j)
  {
    Scenario s;
    try {
      s.n = j.at("n").get<std::size_t>();
      const auto& err = j.at("error");
      s.error_name = err.at("name").get<std::string>();
      if (s.error_name != "none")
        s.error_theta = err.at("theta").get<double>();
      if (s.error_name == "gamma")
        s.error_r = err.at("r").get<double>();
      const auto& op = j.at("operator");
      s.op_form = op.at("form").get<std::string>();
      if (s.op_form == "derivative") {
        s.op_order = op.at("order").get<int>();
        s.op_coeff = op.value("coefficient", 1.0);
      } else if (s.op_form == "fractional") {
        s.op_gamma = op.at("gamma").get<double>();
        s.op_mu = op.at("mu").get<double>();
      } else {
        throw config_error("Scenario: unsupported operator form '" + s.op_form + "'");
      }
      s.kernel_k = j.at("kernel_k").get<int>();
      s.nu = j.value("nu", default_nu());
      s.alpha = j.value("alpha", 0.1);
      const auto& set = j.at("index_set");
      s.set_kind = set.at("kind").get<std::string>();
      if (s.set_kind == "triangular") {
        s.set_N = set.at("N").get<int>();
        s.set_u = set.at("u").get<double>();
      } else if (s.set_kind == "circle") {
        s.set_K = set.at("K").get<int>();
      } else if (s.set_kind == "dyadic") {
        s.set_j0 = set.at("j0").get<int>();
        s.set_j1 = set.at("j1").get<int>();
      } else if (s.set_kind != "triangular_auto") {
        throw config_error("Scenario: unknown index set kind '" + s.set_kind + "'");
      }
      s.seed = j.value("seed", std::uint64_t(1));
      s.reps = j.value("reps", std::size_t(10000));
      s.mode = j.value("mode", std::string("principal"));
      if (s.mode != "principal" && s.mode != "general")
        throw config_error("Scenario: mode must be 'principal' or 'general'");
    } catch (const nlohmann::json::exception& e) {
      throw config_error(std::string("Scenario: malformed JSON: ") + e.what());
    }
    return s;
  }

  nlohmann::json to_json() const
  {
    nlohmann::json err{ { "name", error_name } };
    if (error_name != "none")
      err["theta"] = error_theta;
    if (error_name == "gamma")
      err["r"] = error_r;
    nlohmann::json op;
    if (op_form == "derivative")
      op = { { "form", op_form }, { "order", op_order }, { "coefficient", op_coeff } };
    else
      op = { { "form", op_form }, { "gamma", op_gamma }, { "mu", op_mu } };
    nlohmann::json set{ { "kind", set_kind } };
    if (set_kind == "triangular") {
      set["N"] = set_N;
      set["u"] = set_u;
    } else if (set_kind == "circle") {
      set["K"] = set_K;
    } else if (set_kind == "dyadic") {
      set["j0"] = set_j0;
      set["j1"] = set_j1;
    }
    return nlohmann::json{ { "n", n },
                           { "error", err },
                           { "operator", op },
                           { "kernel_k", kernel_k },
                           { "nu", nu },
                           { "alpha", alpha },
                           { "index_set", set },
                           { "seed", seed },
                           { "reps", reps },
                           { "mode", mode } };
  }

  //! Stable hash over the statistically relevant fields (not alpha, seed or
  //! reps: one quantile table serves every alpha in its grid, and reps/seed
  //! are recorded alongside). Canonical field order, %.17g-normalized reals.
  std::string hash() const
  {
    std::string canon = "n=" + std::to_string(n) + ";error=" + error_name;
    if (error_name != "none")
      canon += ",theta=" + format_double(error_theta);
    if (error_name == "gamma")
      canon += ",r=" + format_double(error_r);
    canon += ";op=" + op_form;
    if (op_form == "derivative")
      canon += ",order=" + std::to_string(op_order) + ",coeff=" + format_double(op_coeff);
    else
      canon += ",gamma=" + format_double(op_gamma) + ",mu=" + format_double(op_mu);
    canon += ";kernel_k=" + std::to_string(kernel_k);
    canon += ";nu=" + format_double(nu);
    canon += ";set=" + set_kind;
    if (set_kind == "triangular")
      canon += ",N=" + std::to_string(set_N) + ",u=" + format_double(set_u);
    else if (set_kind == "circle")
      canon += ",K=" + std::to_string(set_K);
    else if (set_kind == "dyadic")
      canon += ",j0=" + std::to_string(set_j0) + ",j1=" + std::to_string(set_j1);
    canon += ";mode=" + mode;

    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  ErrorModel error_model() const
  {
    if (error_name == "laplace")
      return ErrorModel::laplace(error_theta);
    if (error_name == "gamma")
      return ErrorModel::gamma(error_r, error_theta);
    if (error_name == "exponential")
      return ErrorModel::exponential(error_theta);
    if (error_name == "none")
      return ErrorModel::none();
    throw config_error("Scenario: unknown error model '" + error_name + "'");
  }

  OperatorSpec operator_spec() const
  {
    if (op_form == "derivative")
      return OperatorSpec::derivative(op_order, op_coeff);
    return OperatorSpec::fractional(op_gamma, op_mu);
  }

  ProblemSpec problem() const { return ProblemSpec(operator_spec(), error_model()); }

  Kernel kernel() const { return make_beta_kernel(kernel_k); }

  ScaleLocationSet index_set() const
  {
    if (set_kind == "triangular_auto")
      return triangular_set(triangular_resolution(n), default_max_scale(n));
    if (set_kind == "triangular")
      return triangular_set(set_N, set_u);
    if (set_kind == "circle")
      return circle_set(set_K);
    return dyadic_set(set_j0, set_j1);
  }

  StatisticMode statistic_mode() const
  {
    return mode == "principal" ? StatisticMode::principal : StatisticMode::general;
  }

  MultiscaleConfig config() const
  {
    MultiscaleConfig cfg(kernel(), problem());
    cfg.nu = nu;
    cfg.alpha = alpha;
    cfg.mode = statistic_mode();
    return cfg;
  }
};

} // namespace msdecon
