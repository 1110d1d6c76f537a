#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <yaml-cpp/yaml.h>

#include "wpcn/approx_via.hpp"
#include "wpcn/channel.hpp"
#include "wpcn/maxmin_bisection.hpp"
#include "wpcn/mdp_solver.hpp"
#include "wpcn/physical_model.hpp"

namespace wpcn {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ApproxConfig {
  std::string schedule = "lattice";  ///< lattice | random | full
  int stride = 2;
  double fraction = 0.25;
  double audit_fraction = 0.1;
  std::uint64_t seed = 11;

  SubsetSchedule make_schedule() const;
};

/// Fully resolved run configuration.
struct Config {
  SystemParams system;
  double noise_dbm_per_hz = -155.0;
  std::map<std::string, GridSpec> presets;
  std::string preset = "default";
  FadingModel fading = FadingModel::rayleigh();
  bool reciprocity = true;
  ViOptions vi;
  FairOptions fair;
  ApproxConfig approx;
  std::uint64_t seed = 1;
  YAML::Node experiments;  ///< per-experiment sections, read by the drivers

  const GridSpec& grid() const;
};

/// Built-in defaults: the reference geometry d1 = 1 m, d2 = 3 m and the
/// coarse/default/fine grid presets.
Config default_config();

/// Overlays a YAML document on the defaults. Throws ConfigError.
Config load_config(const std::string& path);
Config parse_config(const YAML::Node& root);

}  // namespace wpcn
