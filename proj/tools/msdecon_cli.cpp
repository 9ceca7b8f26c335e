// Command-line front end: calibrate quantiles, analyze datasets, synthesize
// benchmark data and reproduce the simulation-study tables.

#include <cstdint>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "msdecon/cli.hpp"

namespace {

msdecon::Scenario scenario_with_overrides(const std::string& path, std::uint64_t seed_override,
                                          bool seed_set)
{
  msdecon::Scenario s = msdecon::cli::load_scenario(path);
  if (seed_set)
    s.seed = seed_override;
  return s;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "multiscale shape inference for density deconvolution" };
  app.require_subcommand(1);
  app.fallthrough(); // global options may follow the subcommand

  std::string scenario_path, data_path, quantile_path, out_dir = ".";
  int workers = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;

  app.add_option("--workers", workers, "worker threads (0 = all cores)");
  auto* seed_opt = app.add_option("--seed", seed, "override the scenario seed");

  auto* quantiles = app.add_subcommand("quantiles", "simulate and cache the quantile table");
  quantiles->add_option("--scenario", scenario_path, "scenario JSON")->required();
  quantiles->add_option("--out", out_dir, "output directory");

  auto* analyze = app.add_subcommand("analyze", "confidence rectangles and qualitative report");
  analyze->add_option("--scenario", scenario_path, "scenario JSON")->required();
  analyze->add_option("--data", data_path, "data file, one decimal per line")->required();
  analyze->add_option("--quantiles", quantile_path, "quantile table JSON")->required();
  analyze->add_option("--out", out_dir, "output directory");
  bool rescale = false;
  std::vector<double> window, recon_h;
  analyze->add_flag("--rescale", rescale, "map [min,max] of the data onto [0,1]");
  analyze->add_option("--window", window, "explicit analysis window lo hi")->expected(2);
  analyze->add_option("--recon-h", recon_h, "bandwidths for the reconstruction CSV");

  auto* synthesize = app.add_subcommand("synthesize", "draw Y = X + eps from a mixture truth");
  std::string density_path;
  std::size_t synth_n = 1000;
  synthesize->add_option("--scenario", scenario_path, "scenario JSON (error model, seed)")->required();
  synthesize->add_option("--density", density_path, "mixture density JSON")->required();
  synthesize->add_option("--n", synth_n, "sample size")->required();
  synthesize->add_option("--out", out_dir, "output directory");

  auto* reproduce = app.add_subcommand("reproduce", "simulation-study tables");
  std::string figure;
  std::size_t reps = 0;
  reproduce->add_option("figure", figure, "fig2 | quantile10k | coverage")->required();
  reproduce->add_option("--reps", reps, "replications (default: 10000; coverage: 300)");
  reproduce->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  seed_set = seed_opt->count() > 0;

  try {
    if (*quantiles) {
      msdecon::Scenario s = scenario_with_overrides(scenario_path, seed, seed_set);
      std::string path = msdecon::cli::cmd_quantiles(s, out_dir, workers);
      std::cout << path << "\n";
    } else if (*analyze) {
      msdecon::Scenario s = scenario_with_overrides(scenario_path, seed, seed_set);
      msdecon::cli::AnalyzeOptions opts;
      opts.rescale = rescale;
      if (window.size() == 2) {
        opts.window_lo = window[0];
        opts.window_hi = window[1];
      }
      opts.recon_h = recon_h;
      opts.workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
      msdecon::cli::cmd_analyze(s, data_path, quantile_path, out_dir, opts);
      std::cout << (std::filesystem::path(out_dir) / "report.json").string() << "\n";
    } else if (*synthesize) {
      msdecon::Scenario s = scenario_with_overrides(scenario_path, seed, seed_set);
      std::ifstream in(density_path);
      if (!in)
        throw msdecon::config_error("cannot open density file: " + density_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw msdecon::parse_error(density_path + ": invalid JSON: " + e.what());
      }
      msdecon::MixtureDensity density = msdecon::cli::mixture_from_json(j);
      std::filesystem::create_directories(out_dir);
      std::string data_out = (std::filesystem::path(out_dir) / "data.txt").string();
      std::string side_out = (std::filesystem::path(out_dir) / "data.meta.json").string();
      msdecon::cli::cmd_synthesize(density, s.error_model(), synth_n, s.seed, data_out, side_out);
      std::cout << data_out << "\n";
    } else if (*reproduce) {
      if (reps == 0)
        reps = (figure == "coverage") ? 300 : 10000;
      msdecon::cli::cmd_reproduce(figure, out_dir, workers, reps, seed_set ? seed : 20240901);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return msdecon::cli::exit_code_for(e);
  }
  return 0;
}
