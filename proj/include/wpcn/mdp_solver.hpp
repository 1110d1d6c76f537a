#pragma once

#include <array>
#include <optional>
#include <vector>

#include "wpcn/bellman.hpp"
#include "wpcn/channel.hpp"
#include "wpcn/markov_chain.hpp"
#include "wpcn/value_function.hpp"

namespace wpcn {

/// Long-term throughputs in bits/s.
struct ThroughputPair {
  double g1 = 0.0;
  double g2 = 0.0;
  double min() const { return g1 < g2 ? g1 : g2; }
};

struct ViOptions {
  double tol = -1.0;  ///< span tolerance; < 0 selects 1e-6 * T, 0 runs max_iters sweeps
  int max_iters = 5000;
  /// Subtract K(0,0) after every sweep. Disabled only to compare raw
  /// iterates of two value-iteration variants.
  bool anchor = true;
  /// K <- (1 - w) K + w T(K); w < 1 removes periodicity.
  double relaxation = 1.0;
  /// Fixed-policy backups K <- r_mu + P_mu K after each improvement sweep
  /// (modified policy iteration). Same fixed point; 0 gives plain value
  /// iteration.
  int evaluation_sweeps = 50;
  SweepKernel kernel = SweepKernel::kParallel;
  const ValueFunction* warm_start = nullptr;
  OptimizerOptions optimizer{};
  bool keep_trace = false;
};

struct ViResult {
  ValueFunction K;
  Policy policy;
  int iterations = 0;
  bool converged = false;
  double gain = 0.0;  ///< optimal weighted reward per slot, midpoint of the span bounds
  double span = 0.0;  ///< final span of T(K) - K
  std::vector<double> span_trace;
};

double default_tolerance(const SystemParams& p);

/// Relative value iteration for the average-reward criterion.
ViResult value_iteration(double alpha, const ChannelPmf& pmf, const SystemParams& p,
                         const GridSpec& g, const ViOptions& opts = {});

/// Same, reusing a prebuilt operator.
ViResult value_iteration(const BellmanOperator& op, const SystemParams& p,
                         const ViOptions& opts = {});

/// One fixed-policy backup: out(b) = sum_c f(c) [r_alpha + K(b')].
void policy_backup(const Policy& policy, const ChannelPmf& pmf, double alpha,
                   const ValueFunction& K, ValueFunction& out);

/// Steady-state averages of a policy, from full batteries.
struct PolicyEvaluation {
  ThroughputPair throughput;           ///< bits/s
  std::array<double, 2> slot_reward{}; ///< per-slot tau_i R_i average
  std::vector<double> occupancy;       ///< long-run battery-state distribution
  bool multichain = false;
  std::size_t closed_classes = 0;
  double stationary_residual = 0.0;
};

/// Battery-state chain induced by a policy (channel integrated out).
SparseChain induced_chain(const Policy& policy, const ChannelPmf& pmf);

PolicyEvaluation evaluate_policy(const Policy& policy, const ChannelPmf& pmf,
                                 const SystemParams& p);

/// Steady-state averages used to describe how a policy divides a slot.
struct SlotDivision {
  std::array<double, 2> rho{};  ///< mean transmit power given the device transmits, W
  std::array<double, 2> q_fraction{};  ///< mean Q_i / Q_max
  std::array<double, 2> tau{};  ///< mean uplink time, s
  double tau_ap = 0.0;          ///< mean downlink time, s
  std::array<double, 2> transmit_probability{};
};

SlotDivision slot_division(const Policy& policy, const ChannelPmf& pmf, const SystemParams& p,
                           const std::vector<double>& occupancy);

/// Per-slot reward to bits/s.
inline double to_bps(double slot_reward, const SystemParams& p) {
  return slot_reward * p.bandwidth / p.slot;
}

}  // namespace wpcn
