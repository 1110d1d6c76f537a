#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <ostream>
#include <vector>

#include "wpcn/physical_model.hpp"

namespace wpcn {

/// Quantized battery pair (b1, b2).
struct BatteryState {
  int b1 = 0;
  int b2 = 0;
  friend bool operator==(const BatteryState&, const BatteryState&) = default;
};

/// Row-major indexing of the (b_max1 + 1) x (b_max2 + 1) battery lattice.
class StateSpace {
 public:
  StateSpace() = default;
  explicit StateSpace(std::array<int, 2> b_max) : b_max_(b_max) {}
  explicit StateSpace(const GridSpec& grid) : b_max_(grid.b_max) {}

  std::size_t size() const {
    return static_cast<std::size_t>(b_max_[0] + 1) * static_cast<std::size_t>(b_max_[1] + 1);
  }
  std::size_t index(BatteryState b) const {
    return static_cast<std::size_t>(b.b1) * (b_max_[1] + 1) + static_cast<std::size_t>(b.b2);
  }
  std::size_t index(int b1, int b2) const { return index(BatteryState{b1, b2}); }
  BatteryState state(std::size_t idx) const {
    const auto cols = static_cast<std::size_t>(b_max_[1] + 1);
    return {static_cast<int>(idx / cols), static_cast<int>(idx % cols)};
  }
  const std::array<int, 2>& b_max() const { return b_max_; }
  BatteryState full() const { return {b_max_[0], b_max_[1]}; }
  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  std::array<int, 2> b_max_{1, 1};
};

/// Table K over battery states.
class ValueFunction {
 public:
  ValueFunction() = default;
  explicit ValueFunction(StateSpace space, double fill = 0.0)
      : space_(space), values_(space.size(), fill) {}

  const StateSpace& space() const { return space_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(BatteryState b) { return values_[space_.index(b)]; }
  double at(BatteryState b) const { return values_[space_.index(b)]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  void shift(double c) {
    for (auto& v : values_) v += c;
  }

 private:
  StateSpace space_;
  std::vector<double> values_;
};

/// Sup-norm distance. Throws std::invalid_argument on mismatched spaces.
double sup_distance(const ValueFunction& a, const ValueFunction& b);

/// Physical decision of a slot: TDMA durations, powers and beam split.
struct Action {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau_ap = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
};

/// Reduced decision (tau_ap, Q1, e1, e2).
struct ReducedAction {
  double tau_ap = 0.0;
  double q1 = 0.0;
  int e1 = 0;
  int e2 = 0;
};

/// Action plus its quantized energy bookkeeping and per-device slot rewards
/// tau_i * R(rho_i, h_i).
struct Decision {
  Action action;
  std::array<int, 2> spent{0, 0};
  std::array<int, 2> harvested{0, 0};
  std::array<double, 2> reward{0.0, 0.0};

  BatteryState next(BatteryState b, const std::array<int, 2>& b_max) const {
    return {battery_step_quanta(b.b1, spent[0], harvested[0], b_max[0]),
            battery_step_quanta(b.b2, spent[1], harvested[1], b_max[1])};
  }
  ReducedAction reduced() const { return {action.tau_ap, action.q1, spent[0], spent[1]}; }
};

/// Checks every Action constraint for a state holding `battery` joules.
/// Relative slack `tol` is applied to the equality-type bounds.
bool action_feasible(const Action& a, const SystemParams& p, const std::array<double, 2>& battery,
                     double tol = 1e-9);

/// Deterministic stationary policy over (battery state, channel outcome).
class Policy {
 public:
  Policy() = default;
  Policy(StateSpace space, std::size_t n_channels)
      : space_(space), n_channels_(n_channels), table_(space.size() * n_channels) {}

  const StateSpace& space() const { return space_; }
  std::size_t num_channels() const { return n_channels_; }

  Decision& at(std::size_t state, std::size_t ch) { return table_[state * n_channels_ + ch]; }
  const Decision& at(std::size_t state, std::size_t ch) const {
    return table_[state * n_channels_ + ch];
  }
  const Decision& at(BatteryState b, std::size_t ch) const { return at(space_.index(b), ch); }

 private:
  StateSpace space_;
  std::size_t n_channels_ = 0;
  std::vector<Decision> table_;
};

/// Anything that maps (battery state, channel outcome index) to a decision.
using DecisionRule = std::function<Decision(BatteryState, std::size_t)>;

/// CSV "b1,b2,K", one row per battery state.
void write_value_function_csv(std::ostream& os, const ValueFunction& K);

/// CSV with one row per (battery state, channel outcome): times in s,
/// powers in W, consumed and harvested energy in quanta.
void write_policy_csv(std::ostream& os, const Policy& policy);

inline DecisionRule as_rule(const Policy& policy) {
  return [&policy](BatteryState b, std::size_t ch) { return policy.at(b, ch); };
}

}  // namespace wpcn
