#include <stdexcept>

#include "wpcn/bellman.hpp"

namespace wpcn {

BellmanOperator::BellmanOperator(const SystemParams& p, const GridSpec& g, const ChannelPmf& pmf,
                                 double alpha, const OptimizerOptions& opts)
    : space_(g), pmf_(pmf), alpha_(alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0, 1]");
  tables_.reserve(pmf.size());
  for (const auto& ch : pmf.outcomes) tables_.emplace_back(p, g, ch, alpha, opts);
}

void BellmanOperator::build_continuations(const ValueFunction& K,
                                          std::vector<ContinuationTable>& cont,
                                          SweepKernel kernel) const {
  if (!(K.space() == space_)) throw std::invalid_argument("value function on wrong state space");
  cont.assign(tables_.size(), ContinuationTable{});
  const auto n = static_cast<long>(tables_.size());
  if (kernel == SweepKernel::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long c = 0; c < n; ++c) cont[c].build(tables_[c], K);
  } else {
    for (long c = 0; c < n; ++c) cont[c].build(tables_[c], K);
  }
}

double BellmanOperator::state_update(const ValueFunction& K,
                                     const std::vector<ContinuationTable>& cont, std::size_t s,
                                     Policy* greedy) const {
  const BatteryState b = space_.state(s);
  double acc = 0.0;
  for (std::size_t c = 0; c < tables_.size(); ++c) {
    const auto r = search_state(tables_[c], cont[c], K, b);
    acc += pmf_[c].prob * r.value;
    if (greedy) greedy->at(s, c) = r.decision;
  }
  return acc;
}

void BellmanOperator::apply(const ValueFunction& K, ValueFunction& out, Policy* greedy,
                            SweepKernel kernel) const {
  std::vector<ContinuationTable> cont;
  build_continuations(K, cont, kernel);
  if (!(out.space() == space_)) out = ValueFunction(space_);
  if (greedy && !(greedy->space() == space_ && greedy->num_channels() == tables_.size()))
    *greedy = Policy(space_, tables_.size());
  const auto n = static_cast<long>(space_.size());
  if (kernel == SweepKernel::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long s = 0; s < n; ++s) out[s] = state_update(K, cont, s, greedy);
  } else {
    for (long s = 0; s < n; ++s) out[s] = state_update(K, cont, s, greedy);
  }
}

void BellmanOperator::apply_subset(const ValueFunction& K, std::span<const std::size_t> states,
                                   ValueFunction& out, SweepKernel kernel) const {
  std::vector<ContinuationTable> cont;
  build_continuations(K, cont, kernel);
  if (!(out.space() == space_)) out = ValueFunction(space_);
  const auto n = static_cast<long>(states.size());
  if (kernel == SweepKernel::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) out[states[i]] = state_update(K, cont, states[i], nullptr);
  } else {
    for (long i = 0; i < n; ++i) out[states[i]] = state_update(K, cont, states[i], nullptr);
  }
}

double BellmanOperator::apply_at(const ValueFunction& K, BatteryState b) const {
  std::vector<ContinuationTable> cont;
  build_continuations(K, cont, SweepKernel::kSerial);
  return state_update(K, cont, space_.index(b), nullptr);
}

Policy BellmanOperator::greedy_policy(const ValueFunction& K, SweepKernel kernel) const {
  Policy pol(space_, tables_.size());
  ValueFunction scratch(space_);
  apply(K, scratch, &pol, kernel);
  return pol;
}

}  // namespace wpcn
