#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "wpcn/mdp_solver.hpp"

namespace wpcn {

/// Optimal policy and throughputs for one weight alpha.
struct AlphaSolution {
  double alpha = 0.0;
  ValueFunction K;
  Policy policy;
  ThroughputPair throughput;
  PolicyEvaluation evaluation;
  int iterations = 0;
  bool converged = false;
};

/// Solves the alpha-weighted problem, optionally warm-started from K.
using AlphaSolver = std::function<AlphaSolution(double alpha, const ValueFunction* warm)>;

/// Exact value iteration followed by exact chain evaluation.
AlphaSolver make_exact_solver(const ChannelPmf& pmf, const SystemParams& p, const GridSpec& g,
                              ViOptions vi = {});

struct FairOptions {
  double epsilon_fair = 1e-3;  ///< |G1 - G2| <= epsilon_fair * max(G1, G2)
  int max_bisect = 40;
  double min_bracket = 1e-6;  ///< alpha bracket width at which bisection stalls
  bool warm_start = true;
};

struct FairTraceRow {
  int step = 0;
  double alpha = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
};

struct FairResult {
  double alpha_bar = 0.0;
  Policy policy;             ///< policy at alpha_bar (the lower-alpha side when mixed)
  ThroughputPair throughput; ///< achieved pair, after mixing if any
  bool converged = false;    ///< equality reached within epsilon_fair without mixing
  bool mixed = false;
  /// Time-sharing weight on the alpha_lo policy; 1 - lambda on alpha_hi.
  double lambda = 1.0;
  AlphaSolution lo, hi;  ///< final bracket
  bool all_converged = true;  ///< every inner value iteration converged
  std::vector<FairTraceRow> trace;

  double fair_throughput() const { return throughput.min(); }
};

/// Bisection on alpha: decrease alpha when G1 > G2, increase otherwise.
/// When the bracket collapses without equality, the two bracketing
/// policies are time-shared so that the expected throughputs coincide.
FairResult find_fair_alpha(const AlphaSolver& solve, const FairOptions& opts = {});

FairResult find_fair_alpha(const ChannelPmf& pmf, const SystemParams& p, const GridSpec& g,
                           const FairOptions& opts = {}, ViOptions vi = {});

void write_fair_trace(std::ostream& os, const std::vector<FairTraceRow>& trace);

struct RegionPoint {
  double alpha = 0.0;
  ThroughputPair throughput;
  bool converged = true;
};

/// One optimal throughput pair per alpha, in input order. Throws
/// std::invalid_argument on an empty list or an alpha outside [0, 1].
std::vector<RegionPoint> throughput_region(const AlphaSolver& solve,
                                           const std::vector<double>& alphas);

std::vector<RegionPoint> throughput_region(const ChannelPmf& pmf, const SystemParams& p,
                                           const GridSpec& g, const std::vector<double>& alphas,
                                           ViOptions vi = {});

}  // namespace wpcn
