#include "wpcn/config.hpp"

#include <fstream>

namespace wpcn {

namespace {

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (!node || !node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_grid(const YAML::Node& node, GridSpec& g) {
  if (!node) return;
  if (node["b_max"]) {
    const auto& b = node["b_max"];
    if (b.IsSequence() && b.size() == 2) {
      g.b_max = {b[0].as<int>(), b[1].as<int>()};
    } else if (b.IsScalar()) {
      g.b_max[0] = g.b_max[1] = b.as<int>();
    } else {
      throw ConfigError("grid.b_max must be an integer or a pair");
    }
  }
  read(node, "n_fading_bins", g.n_fading_bins);
  read(node, "n_tauap_grid", g.n_tauap_grid);
  read(node, "n_q1_grid", g.n_q1_grid);
  std::string rounding;
  read(node, "rounding", rounding);
  if (rounding == "ceil")
    g.rounding = Rounding::kCeil;
  else if (rounding == "floor")
    g.rounding = Rounding::kFloor;
  else if (!rounding.empty())
    throw ConfigError("grid.rounding must be floor or ceil");
}

void read_device(const YAML::Node& node, DeviceParams& d) {
  if (!node) return;
  read(node, "distance", d.distance);
  read(node, "h0", d.h0);
  read(node, "g0", d.g0);
  read(node, "gamma", d.gamma);
  read(node, "delta", d.delta);
  if (node["p_min_mW"]) d.p_min = node["p_min_mW"].as<double>() * 1e-3;
  if (node["p_max_mW"]) d.p_max = node["p_max_mW"].as<double>() * 1e-3;
  if (node["b_max_mJ"]) d.b_max = node["b_max_mJ"].as<double>() * 1e-3;
}

}  // namespace

SubsetSchedule ApproxConfig::make_schedule() const {
  if (schedule == "lattice") return SubsetSchedule::fixed_lattice(stride);
  if (schedule == "random") return SubsetSchedule::random(fraction, seed);
  if (schedule == "full") return SubsetSchedule::full();
  throw ConfigError("approx.schedule must be lattice, random or full");
}

const GridSpec& Config::grid() const {
  const auto it = presets.find(preset);
  if (it == presets.end()) throw ConfigError("unknown grid preset '" + preset + "'");
  return it->second;
}

Config default_config() {
  Config c;
  c.system.dev[0].distance = 1.0;
  c.system.dev[1].distance = 3.0;
  GridSpec coarse;
  coarse.b_max = {8, 8};
  coarse.n_fading_bins = 3;
  coarse.n_tauap_grid = coarse.n_q1_grid = 13;
  GridSpec def;
  def.b_max = {10, 10};
  def.n_fading_bins = 4;
  def.n_tauap_grid = def.n_q1_grid = 21;
  GridSpec fine;
  fine.b_max = {20, 20};
  fine.n_fading_bins = 5;
  fine.n_tauap_grid = fine.n_q1_grid = 41;
  c.presets = {{"coarse", coarse}, {"default", def}, {"fine", fine}};
  c.experiments = YAML::Node(YAML::NodeType::Map);
  return c;
}

Config parse_config(const YAML::Node& root) {
  Config c = default_config();
  if (!root || root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("configuration root must be a mapping");
  try {
    const auto sys = root["system"];
    read(sys, "slot_s", c.system.slot);
    read(sys, "q_max_W", c.system.q_max);
    read(sys, "eta", c.system.eta);
    read(sys, "bandwidth_Hz", c.system.bandwidth);
    read(sys, "noise_dBm_per_Hz", c.noise_dbm_per_hz);
    c.system.noise = noise_power_watts(c.noise_dbm_per_hz, c.system.bandwidth);

    if (const auto devs = root["devices"]) {
      if (devs["common"]) {
        read_device(devs["common"], c.system.dev[0]);
        read_device(devs["common"], c.system.dev[1]);
      }
      read_device(devs["d1"], c.system.dev[0]);
      read_device(devs["d2"], c.system.dev[1]);
    }

    if (const auto pre = root["grid_presets"]) {
      if (!pre.IsMap()) throw ConfigError("grid_presets must be a mapping");
      for (const auto& kv : pre) {
        const auto name = kv.first.as<std::string>();
        GridSpec g = c.presets.count(name) ? c.presets[name] : GridSpec{};
        read_grid(kv.second, g);
        c.presets[name] = g;
      }
    }
    read(root, "grid_preset", c.preset);

    if (const auto ch = root["channel"]) {
      std::string fading;
      read(ch, "fading", fading);
      if (!fading.empty()) c.fading = parse_fading(fading);
      read(ch, "reciprocity", c.reciprocity);
    }

    if (const auto s = root["solver"]) {
      read(s, "tol", c.vi.tol);
      read(s, "max_iters", c.vi.max_iters);
      read(s, "evaluation_sweeps", c.vi.evaluation_sweeps);
      read(s, "relaxation", c.vi.relaxation);
      read(s, "epsilon_fair", c.fair.epsilon_fair);
      read(s, "max_bisect", c.fair.max_bisect);
      bool tight = c.vi.optimizer.energy_tight_candidates;
      read(s, "energy_tight_candidates", tight);
      c.vi.optimizer.energy_tight_candidates = tight;
    }

    if (const auto a = root["approx"]) {
      read(a, "schedule", c.approx.schedule);
      read(a, "stride", c.approx.stride);
      read(a, "fraction", c.approx.fraction);
      read(a, "audit_fraction", c.approx.audit_fraction);
      read(a, "seed", c.approx.seed);
    }
    read(root, "seed", c.seed);
    if (root["experiments"]) c.experiments = root["experiments"];
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  try {
    c.system.validate();
    for (const auto& [name, g] : c.presets) g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  (void)c.approx.make_schedule();
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  try {
    return parse_config(YAML::Load(in));
  } catch (const YAML::Exception& e) {
    throw ConfigError("malformed YAML in '" + path + "': " + e.what());
  }
}

}  // namespace wpcn
