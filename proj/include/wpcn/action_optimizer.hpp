#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wpcn/channel.hpp"
#include "wpcn/physical_model.hpp"
#include "wpcn/value_function.hpp"

namespace wpcn {

/// Optimal TDMA split of the uplink window for fixed consumed energies.
struct SplitSolution {
  bool feasible = false;
  double tau1 = 0.0;
  double tau2 = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double r1 = 0.0;  ///< tau1 * R(rho1, h1)
  double r2 = 0.0;
  double objective = 0.0;  ///< alpha * r1 + (1 - alpha) * r2
  bool interior = false;   ///< stationary point strictly inside the window
};

/// d/d(tau1) of the weighted uplink reward with tau2 = T - tau_ap - tau1, in
/// natural-log units. Strictly decreasing in tau1 on (0, T - tau_ap).
double tau1_derivative(double tau1, double e1, double e2, double tau_ap, double h1, double h2,
                       double alpha, const SystemParams& p);

/// Unique zero of tau1_derivative on (0, T - tau_ap); requires 0 < alpha < 1.
std::optional<double> tau1_unconstrained_root(double e1, double e2, double tau_ap, double h1,
                                              double h2, double alpha, const SystemParams& p);

/// Both devices transmit (E1, E2 > 0): the stationary point clamped to the
/// power-feasible window [tau1_min, tau1_max]. Empty when the window is.
std::optional<SplitSolution> solve_tau1(double e1, double e2, double tau_ap, double h1, double h2,
                                        double alpha, const SystemParams& p);

/// All cases, including the single-transmitter and idle ones. Energies in J.
SplitSolution split_transmission(double e1, double e2, double tau_ap, double h1, double h2,
                                 double alpha, const SystemParams& p);

/// j-th of n evenly spaced points on [0, top]; both endpoints exact.
inline double grid_point(double top, int j, int n) {
  return j == n - 1 ? top : top * j / (n - 1);
}

struct OptimizerOptions {
  /// Adds, per energy pair, tau_ap = T - E1/P1 - E2/P2 with both devices at
  /// P_max and with both at P_min to the tau_ap grid.
  bool energy_tight_candidates = true;
};

/// Precomputed per-channel-outcome data for the reduced action search:
/// uplink splits for every (tau_ap, e1, e2) and harvested quanta for every
/// (tau_ap, Q1). Independent of the value function.
class ActionTable {
 public:
  ActionTable(const SystemParams& p, const GridSpec& g, const ChannelOutcome& ch, double alpha,
              const OptimizerOptions& opts = {});

  int n_tau() const { return n_tau_; }
  int n_q() const { return n_q_; }
  double tau_ap(int k) const { return tau_grid_[k]; }
  double q1(int j) const { return q_grid_[j]; }
  double alpha() const { return alpha_; }
  const ChannelOutcome& channel() const { return channel_; }
  bool tight_candidates() const { return tight_flag_; }
  int num_tight_families() const { return tight_flag_ ? kTightFamilies : 0; }

  const SplitSolution& split(int k, int e1, int e2) const {
    return splits_[(static_cast<std::size_t>(k) * e_rows_ + e1) * e_cols_ + e2];
  }
  int harvest(int i, int k, int j) const {
    return harvest_[i][static_cast<std::size_t>(k) * n_q_ + j];
  }

  /// Energy-tight candidate of family f (0: P_max, 1: P_min); negative
  /// tau_ap marks an energy pair that does not fit in the slot.
  double tight_tau_ap(int e1, int e2, int f = 0) const { return tight_[f].tau[e_index(e1, e2)]; }
  const SplitSolution& tight_split(int e1, int e2, int f = 0) const {
    return tight_[f].split[e_index(e1, e2)];
  }
  int tight_harvest(int i, int e1, int e2, int j, int f = 0) const {
    return tight_[f].harvest[i][e_index(e1, e2) * n_q_ + j];
  }

  /// Builds the full decision of a candidate; k = -1 - f selects the
  /// energy-tight candidate of family f.
  Decision decision(int k, int e1, int e2, int j) const;

 private:
  std::size_t e_index(int e1, int e2) const {
    return static_cast<std::size_t>(e1) * e_cols_ + static_cast<std::size_t>(e2);
  }

  static constexpr int kTightFamilies = 2;
  struct TightFamily {
    std::vector<double> tau;
    std::vector<SplitSolution> split;
    std::array<std::vector<int>, 2> harvest;
  };

  double q_max_;
  ChannelOutcome channel_;
  double alpha_;
  bool tight_flag_;
  int n_tau_, n_q_;
  std::size_t e_rows_, e_cols_;
  std::vector<double> tau_grid_, q_grid_;
  std::vector<SplitSolution> splits_;
  std::array<std::vector<int>, 2> harvest_;
  std::array<TightFamily, kTightFamilies> tight_;
};

/// Best continuation max_j K(b') for every residual battery (b - e) and
/// tau_ap grid index, with the maximizing Q1 index.
class ContinuationTable {
 public:
  ContinuationTable() = default;
  void build(const ActionTable& table, const ValueFunction& K);

  double value(int k, std::size_t residual) const { return value_[k * n_states_ + residual]; }
  int q_index(int k, std::size_t residual) const { return arg_[k * n_states_ + residual]; }

 private:
  std::size_t n_states_ = 0;
  std::vector<double> value_;
  std::vector<int> arg_;
};

struct StateSearchResult {
  Decision decision;
  double value = 0.0;  ///< weighted slot reward + K(b')
};

/// Exhaustive reduced-action search for one (battery, channel) state using
/// a prebuilt continuation table. Ties prefer larger tau_ap, then smaller
/// e1 + e2, then smaller Q1.
StateSearchResult search_state(const ActionTable& table, const ContinuationTable& cont,
                               const ValueFunction& K, BatteryState b);

/// argmax over the reduced action of r_alpha + K(b') for one state.
StateSearchResult optimize_state(BatteryState b, const ChannelOutcome& ch, double alpha,
                                 const ValueFunction& K, const SystemParams& p, const GridSpec& g,
                                 const OptimizerOptions& opts = {});

/// Rectangle of energy pairs still worth searching.
struct EnergyRect {
  int e1_lo = 0, e1_hi = 0;
  int e2_lo = 0, e2_hi = 0;
  bool contains(int e1, int e2) const {
    return e1 >= e1_lo && e1 <= e1_hi && e2 >= e2_lo && e2 <= e2_hi;
  }
};

/// Monotone-consumption pruning: once e* is known for uplink gains (h1, h2),
/// a state with h1' >= h1 and h2' <= h2 (same b, g, tau_ap, Q) only needs
/// e1 in [e1*, b1] and e2 in [0, e2*].
EnergyRect prune_bounds(std::array<int, 2> e_star, BatteryState b);

inline EnergyRect full_rect(BatteryState b) { return {0, b.b1, 0, b.b2}; }

struct EnergyChoice {
  int e1 = 0;
  int e2 = 0;
  double value = 0.0;
  bool feasible = false;
};

/// Best (e1, e2) for a fixed tau_ap grid index k and Q1 index j, searching
/// only inside `rect`.
EnergyChoice best_energy_split(const ActionTable& table, const ValueFunction& K, BatteryState b,
                               int k, int j, const EnergyRect& rect);

/// Solves best_energy_split along tables ordered so that h1 is nondecreasing
/// and h2 nonincreasing (shared g), optionally pruning with each result.
std::vector<EnergyChoice> energy_splits_along_chain(std::span<const ActionTable* const> chain,
                                                    const ValueFunction& K, BatteryState b, int k,
                                                    int j, bool prune);

/// Low-SNR search: both devices transmit at P_max, tau_ap = T - tau1 - tau2,
/// the choice is made on the linearized reward alpha E1 h1 + (1-alpha) E2 h2
/// (over sigma0^2) and the reported value uses the exact rates. Falls back to
/// optimize_state when some h_i P_max_i / sigma0^2 >= snr_threshold.
StateSearchResult low_snr_fast_path(BatteryState b, const ChannelOutcome& ch, double alpha,
                                    const ValueFunction& K, const SystemParams& p,
                                    const GridSpec& g, double snr_threshold,
                                    bool* used_fast_path = nullptr);

}  // namespace wpcn
