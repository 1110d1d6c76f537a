#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace wpcn {

/// Row-stochastic sparse transition matrix; duplicate targets are merged.
class SparseChain {
 public:
  explicit SparseChain(std::size_t n) : rows_(n) {}

  std::size_t size() const { return rows_.size(); }
  void add(std::size_t from, std::size_t to, double p);
  const std::vector<std::pair<std::size_t, double>>& row(std::size_t i) const { return rows_[i]; }

  /// Largest |1 - row sum|.
  double max_row_defect() const;

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
};

/// States reachable from `start` (including it), in ascending order.
std::vector<std::size_t> reachable_from(const SparseChain& chain, std::size_t start);

/// Strongly connected components (Tarjan), each sorted ascending.
std::vector<std::vector<std::size_t>> strongly_connected_components(const SparseChain& chain);

/// Components with no edge leaving them.
std::vector<std::vector<std::size_t>> closed_classes(const SparseChain& chain);

/// Stationary distribution of the chain restricted to a closed class,
/// returned over the full state index range (zero outside the class).
/// Power iteration on (P + I) / 2 to `tol` in L1; falls back to a direct
/// sparse solve when iteration stalls.
std::vector<double> class_stationary(const SparseChain& chain, const std::vector<std::size_t>& cls,
                                     double tol = 1e-12, std::size_t max_iters = 200000);

/// Probability of ending in each closed class when starting from `start`.
std::vector<double> absorption_probabilities(const SparseChain& chain,
                                             const std::vector<std::vector<std::size_t>>& classes,
                                             std::size_t start);

struct LimitDistribution {
  std::vector<double> pi;  ///< Cesaro limit of the state distribution from start
  std::size_t reachable_closed_classes = 0;
  bool multichain = false;  ///< more than one closed class reachable from start
};

/// Long-run state occupancy from `start`, mixing class stationary
/// distributions with their absorption probabilities.
LimitDistribution limit_distribution(const SparseChain& chain, std::size_t start,
                                     double tol = 1e-12);

/// max_j |(pi P)_j - pi_j|.
double fixed_point_residual(const SparseChain& chain, const std::vector<double>& pi);

}  // namespace wpcn
