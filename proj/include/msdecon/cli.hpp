#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "msdecon/experiments.hpp"
#include "msdecon/gaussian_sim.hpp"
#include "msdecon/inference.hpp"
#include "msdecon/io.hpp"
#include "msdecon/scenario.hpp"

namespace msdecon::cli {

inline Scenario load_scenario(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw config_error("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path + ": invalid JSON: " + e.what());
  }
  return Scenario::from_json(j);
}

//! Simulate the approximating statistic for the scenario and write the
//! quantile table {scenario_hash, alpha_grid, quantiles, mc_stderr, reps,
//! seed}. Deterministic: identical scenario and seed give identical bytes.
inline std::string cmd_quantiles(const Scenario& scenario, const std::string& out_dir, int workers)
{
  if (scenario.reps < 1000)
    throw config_error("cmd_quantiles: at least 1000 replications required for reported quantiles");

  MultiscaleConfig config = scenario.config();
  ScaleLocationSet set = scenario.index_set();
  SimOptions opts;
  opts.reps = scenario.reps;
  opts.seed = scenario.seed;
  opts.workers = workers;
  std::vector<double> samples = simulate_statistic(config, set, scenario.statistic_mode(), opts);

  const std::vector<double> alpha_grid = { 0.01, 0.025, 0.05, 0.075, 0.1, 0.15,
                                           0.2, 0.25, 0.3, 0.4, 0.5 };
  nlohmann::json out;
  out["scenario_hash"] = scenario.hash();
  out["reps"] = scenario.reps;
  out["seed"] = scenario.seed;
  out["alpha_grid"] = alpha_grid;
  std::vector<double> qs, ses;
  for (double a : alpha_grid) {
    QuantileEstimate est = quantile(samples, a);
    qs.push_back(est.value);
    ses.push_back(est.mc_stderr);
  }
  out["quantiles"] = qs;
  out["mc_stderr"] = ses;

  std::filesystem::create_directories(out_dir);
  std::string path = (std::filesystem::path(out_dir) / ("quantiles-" + scenario.hash() + ".json")).string();
  write_atomic(path, out.dump(2) + "\n");
  return path;
}

struct QuantileTable {
  std::string scenario_hash;
  std::vector<double> alpha_grid;
  std::vector<double> quantiles;

  double at(double alpha) const
  {
    for (std::size_t i = 0; i < alpha_grid.size(); ++i)
      if (std::abs(alpha_grid[i] - alpha) < 1e-12)
        return quantiles[i];
    throw calibration_error("quantile table does not contain alpha requested");
  }
};

inline QuantileTable load_quantiles(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw config_error("cannot open quantile file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path + ": invalid JSON: " + e.what());
  }
  QuantileTable t;
  try {
    t.scenario_hash = j.at("scenario_hash").get<std::string>();
    t.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    t.quantiles = j.at("quantiles").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path + ": missing field: " + e.what());
  }
  if (t.alpha_grid.size() != t.quantiles.size())
    throw parse_error(path + ": alpha_grid / quantiles length mismatch");
  return t;
}

struct AnalyzeOptions {
  bool rescale = false;       //!< affine map of [min, max] onto [0, 1]
  double window_lo = 0.0;     //!< explicit window (used when window_hi > window_lo)
  double window_hi = 0.0;
  std::vector<double> recon_h; //!< bandwidths for the reconstruction CSV
  int workers = 1;             //!< threads for the statistic table
};

//! Analyze a data file against a calibrated scenario: emits the report JSON,
//! the rectangle CSV and a kernel-reconstruction CSV t -> T_{t,h}/(h sqrt n).
inline void cmd_analyze(const Scenario& scenario, const std::string& data_path,
                        const std::string& quantile_path, const std::string& out_dir,
                        const AnalyzeOptions& opts = {})
{
  std::vector<double> data = read_data_file(data_path);

  QuantileTable table_q = load_quantiles(quantile_path);
  if (table_q.scenario_hash != scenario.hash())
    throw calibration_error("quantile table was computed for a different scenario (hash mismatch)");
  const double q_alpha = table_q.at(scenario.alpha);

  double shift = 0.0, scale = 1.0;
  if (opts.window_hi > opts.window_lo) {
    shift = opts.window_lo;
    scale = opts.window_hi - opts.window_lo;
  } else if (opts.rescale) {
    double lo = data.front(), hi = data.front();
    for (double y : data) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    if (!(hi > lo))
      throw config_error("cmd_analyze: degenerate data range, cannot rescale");
    shift = lo;
    scale = hi - lo;
  }
  if (shift != 0.0 || scale != 1.0)
    for (auto& y : data)
      y = (y - shift) / scale;

  MultiscaleConfig config = scenario.config();
  ScaleLocationSet set = scenario.index_set();
  StatisticTable table = statistics_over_set(data, set, config, std::max(1, opts.workers));
  std::vector<ConfidenceRectangle> rects = rectangles(table, q_alpha, data.size(), config.nu);
  QualitativeReport report = extract_report(rects, scenario.alpha);

  auto interval_list = [](const std::vector<Interval>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& iv : v)
      arr.push_back({ { "lo", iv.lo }, { "hi", iv.hi } });
    return arr;
  };
  nlohmann::json jr;
  jr["alpha"] = scenario.alpha;
  jr["nu"] = scenario.nu;
  jr["mode"] = scenario.mode;
  jr["scenario_hash"] = scenario.hash();
  jr["n"] = data.size();
  jr["window"] = { { "shift", shift }, { "scale", scale } };
  nlohmann::json jrects = nlohmann::json::array();
  for (const auto& r : rects)
    jrects.push_back({ { "t", r.t }, { "h", r.h }, { "b_minus", r.b_minus },
                       { "b_plus", r.b_plus }, { "d", r.d } });
  jr["rectangles"] = jrects;
  jr["increases"] = interval_list(report.increases);
  jr["decreases"] = interval_list(report.decreases);
  jr["minimal_increases"] = interval_list(report.minimal_increases);
  jr["minimal_decreases"] = interval_list(report.minimal_decreases);
  jr["root_intervals"] = interval_list(report.root_intervals);
  jr["mode_count_lower_bound"] = report.mode_count_lower_bound;

  std::filesystem::create_directories(out_dir);
  auto out = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  write_atomic(out("report.json"), jr.dump(2) + "\n");

  std::ostringstream csv;
  csv << "t,h,b_minus,b_plus,d\n";
  for (const auto& r : rects)
    csv << format_double(r.t) << "," << format_double(r.h) << "," << format_double(r.b_minus)
        << "," << format_double(r.b_plus) << "," << format_double(r.d) << "\n";
  write_atomic(out("rectangles.csv"), csv.str());

  std::vector<double> recon_h = opts.recon_h;
  if (recon_h.empty()) {
    std::vector<double> hs;
    for (const auto& p : set.pairs)
      hs.push_back(p.h);
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    recon_h = { hs.front(), hs[hs.size() / 2], hs.back() };
  }
  std::ostringstream rcsv;
  rcsv << "h,t,estimate\n";
  const double sqrt_n = std::sqrt(static_cast<double>(data.size()));
  for (double h : recon_h) {
    for (const auto& row : table.rows) {
      if (std::abs(row.h - h) < 1e-12)
        rcsv << format_double(h) << "," << format_double(row.t) << ","
             << format_double(row.T / (row.h * sqrt_n)) << "\n";
    }
  }
  write_atomic(out("reconstruction.csv"), rcsv.str());
}

//! Draw Y = X + eps from a mixture truth and write the data file plus a
//! sidecar recording the exact density, so op(p)f stays computable.
inline void cmd_synthesize(const MixtureDensity& density, const ErrorModel& noise, std::size_t n,
                           std::uint64_t seed, const std::string& data_path,
                           const std::string& sidecar_path)
{
  Rng rng(seed);
  std::ostringstream data;
  for (std::size_t i = 0; i < n; ++i) {
    double x = density.sample(rng);
    double eps = noise.family() == ErrorModel::Family::none ? 0.0 : noise.sample(1, rng)[0];
    data << format_double(x + eps) << "\n";
  }

  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : density.components())
    comps.push_back({ { "type", c.type == MixtureComponent::Type::beta ? "beta" : "truncated_normal" },
                      { "p1", c.p1 },
                      { "p2", c.p2 },
                      { "weight", c.weight } });
  nlohmann::json side;
  side["density"] = { { "components", comps } };
  side["n"] = n;
  side["seed"] = seed;
  side["error"] = { { "family", static_cast<int>(noise.family()) },
                    { "theta", noise.theta() },
                    { "r", noise.ill_posedness() } };

  write_atomic(data_path, data.str());
  write_atomic(sidecar_path, side.dump(2) + "\n");
}

inline MixtureDensity mixture_from_json(const nlohmann::json& j)
{
  std::vector<MixtureComponent> comps;
  try {
    for (const auto& c : j.at("components")) {
      MixtureComponent mc;
      std::string type = c.at("type").get<std::string>();
      if (type == "beta")
        mc.type = MixtureComponent::Type::beta;
      else if (type == "truncated_normal")
        mc.type = MixtureComponent::Type::truncated_normal;
      else
        throw config_error("mixture: unknown component type '" + type + "'");
      mc.p1 = c.at("p1").get<double>();
      mc.p2 = c.at("p2").get<double>();
      mc.weight = c.at("weight").get<double>();
      comps.push_back(mc);
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("mixture: malformed JSON: ") + e.what());
  }
  return MixtureDensity(comps);
}

//! Reproduction tables: boxplot summaries over n, the n = 10^4 quantile, and
//! the simultaneous-coverage experiment.
inline void cmd_reproduce(const std::string& figure, const std::string& out_dir, int workers,
                          std::size_t reps, std::uint64_t seed)
{
  std::filesystem::create_directories(out_dir);
  auto out = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  if (figure == "fig2") {
    std::ostringstream csv;
    csv << "n,min,q1,median,q3,max,reps\n";
    for (std::size_t n : { std::size_t(200), std::size_t(1000), std::size_t(10000) }) {
      Scenario s = benchmark_scenario(n, reps, seed);
      SimOptions opts;
      opts.reps = s.reps;
      opts.seed = s.seed;
      opts.workers = workers;
      auto samples = simulate_statistic(s.config(), s.index_set(), StatisticMode::principal, opts);
      FiveNumberSummary f = five_number_summary(samples);
      csv << n << "," << format_double(f.min) << "," << format_double(f.q1) << ","
          << format_double(f.median) << "," << format_double(f.q3) << "," << format_double(f.max)
          << "," << samples.size() << "\n";
    }
    write_atomic(out("fig2_boxplots.csv"), csv.str());
  } else if (figure == "quantile10k") {
    Scenario s = benchmark_scenario(10000, reps, seed);
    SimOptions opts;
    opts.reps = s.reps;
    opts.seed = s.seed;
    opts.workers = workers;
    auto samples = simulate_statistic(s.config(), s.index_set(), StatisticMode::principal, opts);
    QuantileEstimate est = quantile(samples, 0.1);
    std::ostringstream csv;
    csv << "alpha,quantile,mc_stderr,reps\n";
    csv << "0.1," << format_double(est.value) << "," << format_double(est.mc_stderr) << ","
        << est.reps << "\n";
    write_atomic(out("quantile10k.csv"), csv.str());
  } else if (figure == "coverage") {
    int replications = static_cast<int>(reps);
    CoverageResult r = coverage_experiment(2000, 0.1, replications, seed, workers);
    std::ostringstream csv;
    csv << "replications,all_covered,coverage_fraction,artefact_ok_fraction,both_signs_fraction\n";
    csv << r.reps << "," << r.all_covered << "," << format_double(r.coverage_fraction()) << ","
        << format_double(r.artefact_fraction()) << "," << format_double(r.both_signs_fraction())
        << "\n";
    write_atomic(out("coverage.csv"), csv.str());
  } else {
    throw config_error("cmd_reproduce: unknown figure '" + figure + "' (fig2|quantile10k|coverage)");
  }
}

//! Exit-code mapping shared by the CLI entry point and the end-to-end tests.
inline int exit_code_for(const std::exception& e)
{
  if (dynamic_cast<const calibration_error*>(&e))
    return 3;
  if (dynamic_cast<const parse_error*>(&e))
    return 4;
  if (dynamic_cast<const resolution_error*>(&e))
    return 5;
  if (dynamic_cast<const config_error*>(&e))
    return 2;
  return 2;
}

} // namespace msdecon::cli
