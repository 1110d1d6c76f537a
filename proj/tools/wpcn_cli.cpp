// Experiment driver: wpcn --config FILE --experiment NAME --out DIR
#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "wpcn/experiments.hpp"

#ifndef WPCN_VERSION
#define WPCN_VERSION "unknown"
#endif

namespace {

enum ExitCode {
  kOk = 0,
  kConfigError = 2,
  kUnknownExperiment = 3,
  kNonConvergence = 4,
  kOutputError = 5,
};

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-term max-min throughput policies for a two-device WPCN"};
  std::string config_path, experiment, out_dir = "results", preset;
  std::uint64_t seed = 0;
  int threads = 0;
  bool list = false;
  app.add_option("--config", config_path, "YAML configuration file");
  app.add_option("--experiment", experiment, "experiment name");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--threads", threads, "OpenMP threads (overrides WPCN_THREADS)");
  app.add_option("--grid-preset", preset, "grid preset")
      ->check(CLI::IsMember({"coarse", "default", "fine"}));
  app.add_flag("--list", list, "list experiment names and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  if (list) {
    for (const auto& n : wpcn::experiment_names()) std::cout << n << '\n';
    return kOk;
  }
  if (experiment.empty()) {
    std::cerr << "error: --experiment is required\n";
    return kConfigError;
  }

  if (threads <= 0) {
    if (const char* env = std::getenv("WPCN_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) omp_set_num_threads(threads);

  wpcn::Config cfg;
  try {
    cfg = config_path.empty() ? wpcn::default_config() : wpcn::load_config(config_path);
    if (!preset.empty()) cfg.preset = preset;
    if (seed != 0) cfg.seed = seed;
    (void)cfg.grid();
  } catch (const wpcn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  const bool known = std::find(wpcn::experiment_names().begin(), wpcn::experiment_names().end(),
                               experiment) != wpcn::experiment_names().end();
  if (!known) {
    std::cerr << "unknown experiment '" << experiment << "'; try --list\n";
    return kUnknownExperiment;
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    std::cerr << "cannot create output directory '" << out_dir << "'\n";
    return kOutputError;
  }

  const auto t0 = std::chrono::steady_clock::now();
  wpcn::ExperimentRun run;
  try {
    run = wpcn::run_experiment(experiment, cfg, out_dir);
  } catch (const wpcn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const wpcn::UnknownExperiment& e) {
    std::cerr << e.what() << '\n';
    return kUnknownExperiment;
  } catch (const wpcn::OutputError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kOutputError;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json manifest = {{"experiment", experiment},
                             {"config_file", config_path},
                             {"config", wpcn::config_to_json(cfg)},
                             {"code_version", WPCN_VERSION},
                             {"threads", omp_get_max_threads()},
                             {"timestamp", utc_timestamp()},
                             {"wall_time_s", wall},
                             {"outputs", run.outputs},
                             {"all_converged", run.all_converged},
                             {"results", run.results}};
  std::ofstream mf(fs::path(out_dir) / "manifest.json");
  if (!mf) {
    std::cerr << "output error: cannot write manifest.json\n";
    return kOutputError;
  }
  mf << manifest.dump(2) << '\n';
  if (!mf) return kOutputError;

  std::cout << experiment << ": wrote " << run.outputs.size() << " file(s) to " << out_dir
            << " in " << wall << " s\n";
  if (!run.all_converged) {
    std::cerr << "warning: value iteration did not converge for every solve\n";
    return kNonConvergence;
  }
  return kOk;
}
