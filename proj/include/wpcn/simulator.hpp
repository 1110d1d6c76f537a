#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "wpcn/channel.hpp"
#include "wpcn/mdp_solver.hpp"
#include "wpcn/value_function.hpp"

namespace wpcn {

struct SimulationOptions {
  std::uint64_t n_slots = 1000000;
  std::uint64_t seed = 1;
  double burn_in_fraction = 0.01;
  int n_batches = 50;  ///< batch-means standard error
  bool check_feasibility = true;
  std::ostream* trajectory = nullptr;  ///< optional per-slot CSV dump
};

struct SimulationResult {
  ThroughputPair throughput;  ///< bits/s
  ThroughputPair std_error;   ///< bits/s
  std::vector<double> occupancy;  ///< fraction of measured slots per battery state
  std::uint64_t measured_slots = 0;
};

/// Channel outcome sampler by inverse CDF over the pmf.
class ChannelSampler {
 public:
  explicit ChannelSampler(const ChannelPmf& pmf);
  std::size_t operator()(double u) const;

 private:
  std::vector<double> cdf_;
};

/// Uniform in [0, 1) from the top 53 bits of one mt19937_64 draw.
double uniform01(std::uint64_t word);

/// Slot-by-slot simulation from full batteries. The channel stream is an
/// mt19937_64 seeded with seed_seq{seed, 0}; one draw per slot. Throws
/// std::runtime_error naming the state when the rule returns an action that
/// is infeasible there.
SimulationResult simulate(const DecisionRule& rule, const ChannelPmf& pmf, const SystemParams& p,
                          const GridSpec& g, const SimulationOptions& opts = {});

}  // namespace wpcn
