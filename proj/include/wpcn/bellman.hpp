#pragma once

#include <span>
#include <vector>

#include "wpcn/action_optimizer.hpp"
#include "wpcn/channel.hpp"
#include "wpcn/value_function.hpp"

namespace wpcn {

enum class SweepKernel { kSerial, kParallel };

/// Policy-improvement operator
///   T(K)(b) = sum_c f(c) max_a [ alpha r1 + (1 - alpha) r2 + K(b') ]
/// for a fixed alpha and channel pmf. Action tables are built once; each
/// application rebuilds the continuation tables from K and then sweeps the
/// battery states against the immutable input (Jacobi update).
class BellmanOperator {
 public:
  BellmanOperator(const SystemParams& p, const GridSpec& g, const ChannelPmf& pmf, double alpha,
                  const OptimizerOptions& opts = {});

  const StateSpace& space() const { return space_; }
  const ChannelPmf& pmf() const { return pmf_; }
  double alpha() const { return alpha_; }
  std::size_t num_channels() const { return tables_.size(); }
  const ActionTable& table(std::size_t c) const { return tables_[c]; }

  /// out = T(K) on every state; optionally stores the greedy decisions.
  void apply(const ValueFunction& K, ValueFunction& out, Policy* greedy = nullptr,
             SweepKernel kernel = SweepKernel::kParallel) const;

  /// out[s] = T(K)(s) for s in `states` only; other entries are untouched.
  void apply_subset(const ValueFunction& K, std::span<const std::size_t> states,
                    ValueFunction& out, SweepKernel kernel = SweepKernel::kParallel) const;

  /// T(K) at one state (builds its own continuation tables).
  double apply_at(const ValueFunction& K, BatteryState b) const;

  Policy greedy_policy(const ValueFunction& K, SweepKernel kernel = SweepKernel::kParallel) const;

 private:
  void build_continuations(const ValueFunction& K, std::vector<ContinuationTable>& cont,
                           SweepKernel kernel) const;
  double state_update(const ValueFunction& K, const std::vector<ContinuationTable>& cont,
                      std::size_t s, Policy* greedy) const;

  StateSpace space_;
  ChannelPmf pmf_;
  double alpha_;
  std::vector<ActionTable> tables_;
};

}  // namespace wpcn
