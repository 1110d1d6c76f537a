#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wpcn/config.hpp"

namespace wpcn {

class UnknownExperiment : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output directory or file cannot be written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentRun {
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> outputs;  ///< written file names, relative to the output dir
  bool all_converged = true;
};

const std::vector<std::string>& experiment_names();

/// Runs one named experiment, writing its CSV files into `out`. Throws
/// UnknownExperiment, ConfigError or OutputError.
ExperimentRun run_experiment(const std::string& name, const Config& cfg,
                             const std::filesystem::path& out);

/// Resolved configuration as JSON, for the run manifest.
nlohmann::json config_to_json(const Config& cfg);

SystemParams with_geometry(SystemParams p, double d1, double d2);
SystemParams with_battery(SystemParams p, double b_max_mj);
/// "high": P in [1, 10] mW; "low": P in [0.01, 0.5] mW.
SystemParams with_power(SystemParams p, const std::string& regime);

ChannelPmf make_pmf(const Config& cfg, const SystemParams& p, const GridSpec& g,
                    const FadingModel& fading);

/// Fair point of one configuration, exact value iteration.
FairResult solve_fair_exact(const Config& cfg, const SystemParams& p, const GridSpec& g,
                            const FadingModel& fading);

/// Fair point with App-VIA policies.
FairResult solve_fair_approx(const Config& cfg, const SystemParams& p, const GridSpec& g,
                             const FadingModel& fading);

}  // namespace wpcn
