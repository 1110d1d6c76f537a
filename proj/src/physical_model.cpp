#include "wpcn/physical_model.hpp"

#include <limits>

namespace wpcn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void SystemParams::validate() const {
  require(slot > 0.0, "slot duration T must be positive");
  require(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
  require(q_max > 0.0, "q_max must be positive");
  require(noise > 0.0, "noise power must be positive");
  require(bandwidth > 0.0, "bandwidth must be positive");
  for (int i = 0; i < 2; ++i) {
    const auto& d = dev[i];
    const std::string tag = "device " + std::to_string(i + 1) + ": ";
    require(d.distance > 0.0, tag + "distance must be positive");
    require(d.p_min > 0.0 && d.p_min <= d.p_max, tag + "need 0 < p_min <= p_max");
    require(d.b_max > 0.0, tag + "battery capacity must be positive");
    require(d.h0 >= 0.0 && d.g0 >= 0.0, tag + "reference gains must be nonnegative");
  }
}

void GridSpec::validate() const {
  require(b_max[0] >= 1 && b_max[1] >= 1, "battery quanta must be >= 1");
  require(n_fading_bins >= 1, "n_fading_bins must be >= 1");
  require(n_tauap_grid >= 2, "n_tauap_grid must be >= 2 (endpoints are always included)");
  require(n_q1_grid >= 2, "n_q1_grid must be >= 2 (endpoints are always included)");
}

int harvest_quanta(double joules, const SystemParams& p, const GridSpec& g, int i) {
  if (joules <= 0.0) return 0;
  const double x = joules * g.b_max[i] / p.dev[i].b_max;
  // Anything above the capacity saturates anyway; keeps the cast in range.
  if (x >= g.b_max[i]) return g.b_max[i];
  // Relative slack absorbs representation error such as 3.9999999999999996.
  constexpr double kSlack = 1e-9;
  if (g.rounding == Rounding::kFloor) return static_cast<int>(std::floor(x * (1.0 + kSlack)));
  return static_cast<int>(std::ceil(x * (1.0 - kSlack)));
}

int battery_step(int b, int e, double harvested_joules, const SystemParams& p,
                 const GridSpec& g, int i) {
  if (b < 0 || b > g.b_max[i]) throw std::invalid_argument("battery level out of range");
  if (e < 0) throw std::invalid_argument("negative energy consumption");
  if (e > b) throw std::invalid_argument("energy causality violated: e > b");
  if (harvested_joules < 0.0) throw std::invalid_argument("negative harvested energy");
  return battery_step_quanta(b, e, harvest_quanta(harvested_joules, p, g, i), g.b_max[i]);
}

}  // namespace wpcn
