#include "wpcn/markov_chain.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace wpcn {

void SparseChain::add(std::size_t from, std::size_t to, double p) {
  if (from >= rows_.size() || to >= rows_.size()) throw std::out_of_range("chain index");
  if (p == 0.0) return;
  for (auto& [j, v] : rows_[from])
    if (j == to) {
      v += p;
      return;
    }
  rows_[from].emplace_back(to, p);
}

double SparseChain::max_row_defect() const {
  double worst = 0.0;
  for (const auto& r : rows_) {
    double s = 0.0;
    for (const auto& e : r) s += e.second;
    worst = std::max(worst, std::abs(1.0 - s));
  }
  return worst;
}

std::vector<std::size_t> reachable_from(const SparseChain& chain, std::size_t start) {
  std::vector<char> seen(chain.size(), 0);
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    const auto s = stack.back();
    stack.pop_back();
    for (const auto& [t, p] : chain.row(s))
      if (!seen[t]) {
        seen[t] = 1;
        stack.push_back(t);
      }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (seen[i]) out.push_back(i);
  return out;
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const SparseChain& chain) {
  const std::size_t n = chain.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;

  // Iterative Tarjan: frames hold (node, next edge position).
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    frames.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      const auto& row = chain.row(v);
      if (pos < row.size()) {
        const std::size_t w = row[pos++].first;
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> closed_classes(const SparseChain& chain) {
  const auto comps = strongly_connected_components(chain);
  std::vector<std::size_t> owner(chain.size());
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (auto s : comps[c]) owner[s] = c;
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    bool closed = true;
    for (auto s : comps[c]) {
      for (const auto& [t, p] : chain.row(s))
        if (owner[t] != c) {
          closed = false;
          break;
        }
      if (!closed) break;
    }
    if (closed) out.push_back(comps[c]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<double> direct_stationary(const SparseChain& chain, const std::vector<std::size_t>& cls) {
  const auto m = static_cast<Eigen::Index>(cls.size());
  std::unordered_map<std::size_t, Eigen::Index> local;
  for (Eigen::Index i = 0; i < m; ++i) local[cls[i]] = i;
  // Solve (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (i != m - 1) trip.emplace_back(i, i, -1.0);
    for (const auto& [t, p] : chain.row(cls[i])) {
      const auto j = local.at(t);
      if (j != m - 1) trip.emplace_back(j, i, p);
    }
    trip.emplace_back(m - 1, i, 1.0);
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs[m - 1] = 1.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary solve failed");
  Eigen::VectorXd x = lu.solve(rhs);
  std::vector<double> pi(chain.size(), 0.0);
  for (Eigen::Index i = 0; i < m; ++i) pi[cls[i]] = std::max(0.0, x[i]);
  double s = 0.0;
  for (double v : pi) s += v;
  for (double& v : pi) v /= s;
  return pi;
}

}  // namespace

std::vector<double> class_stationary(const SparseChain& chain, const std::vector<std::size_t>& cls,
                                     double tol, std::size_t max_iters) {
  if (cls.empty()) throw std::invalid_argument("empty class");
  std::vector<double> pi(chain.size(), 0.0), next(chain.size(), 0.0);
  for (auto s : cls) pi[s] = 1.0 / static_cast<double>(cls.size());
  for (std::size_t it = 0; it < max_iters; ++it) {
    for (auto s : cls) next[s] = 0.5 * pi[s];
    for (auto s : cls)
      for (const auto& [t, p] : chain.row(s)) next[t] += 0.5 * p * pi[s];
    double diff = 0.0, total = 0.0;
    for (auto s : cls) {
      diff += std::abs(next[s] - pi[s]);
      total += next[s];
    }
    for (auto s : cls) pi[s] = next[s] / total;
    if (diff < tol) return pi;
  }
  return direct_stationary(chain, cls);
}

std::vector<double> absorption_probabilities(const SparseChain& chain,
                                             const std::vector<std::vector<std::size_t>>& classes,
                                             std::size_t start) {
  const std::size_t n = chain.size();
  constexpr std::size_t kTransient = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(n, kTransient);
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (auto s : classes[c]) owner[s] = c;
  std::vector<double> out(classes.size(), 0.0);
  if (owner[start] != kTransient) {
    out[owner[start]] = 1.0;
    return out;
  }
  // (I - Q) x_c = R_c over the transient states.
  std::vector<std::size_t> transient;
  std::vector<Eigen::Index> local(n, -1);
  for (std::size_t s = 0; s < n; ++s)
    if (owner[s] == kTransient) {
      local[s] = static_cast<Eigen::Index>(transient.size());
      transient.push_back(s);
    }
  const auto m = static_cast<Eigen::Index>(transient.size());
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(classes.size()));
  for (Eigen::Index i = 0; i < m; ++i) {
    trip.emplace_back(i, i, 1.0);
    for (const auto& [t, p] : chain.row(transient[i])) {
      if (owner[t] == kTransient)
        trip.emplace_back(i, local[t], -p);
      else
        rhs(i, static_cast<Eigen::Index>(owner[t])) += p;
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("absorption solve failed");
  const Eigen::MatrixXd x = lu.solve(rhs);
  for (std::size_t c = 0; c < classes.size(); ++c)
    out[c] = x(local[start], static_cast<Eigen::Index>(c));
  return out;
}

LimitDistribution limit_distribution(const SparseChain& chain, std::size_t start, double tol) {
  const auto classes = closed_classes(chain);
  const auto absorb = absorption_probabilities(chain, classes, start);
  LimitDistribution out;
  out.pi.assign(chain.size(), 0.0);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (absorb[c] <= 1e-15) continue;
    ++out.reachable_closed_classes;
    const auto pi_c = class_stationary(chain, classes[c], tol);
    for (auto s : classes[c]) out.pi[s] += absorb[c] * pi_c[s];
  }
  out.multichain = out.reachable_closed_classes > 1;
  double total = 0.0;
  for (double v : out.pi) total += v;
  for (double& v : out.pi) v /= total;
  return out;
}

double fixed_point_residual(const SparseChain& chain, const std::vector<double>& pi) {
  std::vector<double> next(chain.size(), 0.0);
  for (std::size_t s = 0; s < chain.size(); ++s)
    for (const auto& [t, p] : chain.row(s)) next[t] += pi[s] * p;
  double worst = 0.0;
  for (std::size_t s = 0; s < chain.size(); ++s) worst = std::max(worst, std::abs(next[s] - pi[s]));
  return worst;
}

}  // namespace wpcn
