#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "wpcn/bellman.hpp"
#include "wpcn/maxmin_bisection.hpp"
#include "wpcn/mdp_solver.hpp"

namespace wpcn {

/// Battery levels kept per axis; the subset is their tensor product, so the
/// four corners are always present and interpolation never extrapolates.
struct LatticeSubset {
  std::vector<int> rows;  ///< device-1 levels, ascending, contains 0 and b_max1
  std::vector<int> cols;  ///< device-2 levels, ascending, contains 0 and b_max2
  std::vector<std::size_t> states(const StateSpace& space) const;
};

/// Per-iteration choice of the states where the operator is evaluated.
class SubsetSchedule {
 public:
  enum class Kind { kFixedLattice, kRandom, kFull };

  static SubsetSchedule fixed_lattice(int stride);
  /// Each interior level of each axis is kept independently with
  /// probability sqrt(fraction), redrawn every iteration.
  static SubsetSchedule random(double fraction, std::uint64_t seed);
  static SubsetSchedule full();
  /// Stride giving roughly a quarter of the states.
  static SubsetSchedule default_for(const StateSpace& space);

  Kind kind() const { return kind_; }
  int stride() const { return stride_; }
  double fraction() const { return fraction_; }

  LatticeSubset subset(int iteration, const StateSpace& space) const;

 private:
  Kind kind_ = Kind::kFull;
  int stride_ = 1;
  double fraction_ = 1.0;
  std::uint64_t seed_ = 0;
};

/// Bilinear interpolation of the values of K on the lattice points;
/// lattice entries are copied unchanged.
ValueFunction interpolate(const ValueFunction& K, const LatticeSubset& lattice);

struct AvOptions {
  double tol = -1.0;  ///< span tolerance; < 0 selects 1e-6 * T, 0 runs max_iters sweeps
  int max_iters = 5000;
  bool anchor = true;
  /// Fraction of off-lattice states where the exact operator is also
  /// evaluated to measure the interpolation error; 1 measures everywhere.
  double audit_fraction = 0.1;
  std::uint64_t audit_seed = 7;
  SweepKernel kernel = SweepKernel::kParallel;
  const ValueFunction* warm_start = nullptr;
  bool keep_iterates = false;
};

struct AvTraceRow {
  int iteration = 0;
  std::size_t subset_size = 0;
  double epsilon = 0.0;  ///< max |K~(k+1) - T(K~(k))| over audited states
  double span = 0.0;
};

struct AvResult {
  ValueFunction K;  ///< interpolated value function
  Policy policy;    ///< greedy with respect to K
  double epsilon = 0.0;  ///< max over iterations of the audited error
  int iterations = 0;
  bool converged = false;
  double gain = 0.0;
  std::vector<AvTraceRow> trace;
  std::vector<ValueFunction> iterates;  ///< K~(1..N) when keep_iterates
};

AvResult approx_value_iteration(const BellmanOperator& op, const SystemParams& p,
                                const SubsetSchedule& schedule, const AvOptions& opts = {});

AvResult approx_value_iteration(double alpha, const ChannelPmf& pmf, const SystemParams& p,
                                const GridSpec& g, const SubsetSchedule& schedule,
                                const AvOptions& opts = {});

/// sup |exact - approx| <= N epsilon (with a relative floating slack).
/// Throws std::invalid_argument on mismatched state spaces.
bool verify_bound(const ValueFunction& exact, const ValueFunction& approx, int n, double epsilon);

void write_av_trace(std::ostream& os, const std::vector<AvTraceRow>& trace);

/// AlphaSolver using App-VIA for the policy and exact chain evaluation.
AlphaSolver make_approx_solver(const ChannelPmf& pmf, const SystemParams& p, const GridSpec& g,
                               SubsetSchedule schedule, AvOptions av = {});

}  // namespace wpcn
