#include "wpcn/maxmin_bisection.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace wpcn {

AlphaSolver make_exact_solver(const ChannelPmf& pmf, const SystemParams& p, const GridSpec& g,
                              ViOptions vi) {
  return [pmf, p, g, vi](double alpha, const ValueFunction* warm) {
    ViOptions o = vi;
    o.warm_start = warm;
    const BellmanOperator op(p, g, pmf, alpha, o.optimizer);
    ViResult r = value_iteration(op, p, o);
    AlphaSolution s;
    s.alpha = alpha;
    s.evaluation = evaluate_policy(r.policy, pmf, p);
    s.throughput = s.evaluation.throughput;
    s.K = std::move(r.K);
    s.policy = std::move(r.policy);
    s.iterations = r.iterations;
    s.converged = r.converged;
    return s;
  };
}

namespace {

double imbalance(const ThroughputPair& t) { return t.g1 - t.g2; }

bool balanced(const ThroughputPair& t, double eps) {
  return std::abs(t.g1 - t.g2) <= eps * std::max(t.g1, t.g2);
}

}  // namespace

FairResult find_fair_alpha(const AlphaSolver& solve, const FairOptions& opts) {
  if (opts.epsilon_fair <= 0.0) throw std::invalid_argument("epsilon_fair must be positive");
  FairResult res;
  int step = 0;
  auto record = [&](const AlphaSolution& s) {
    res.trace.push_back({step++, s.alpha, s.throughput.g1, s.throughput.g2});
    res.all_converged = res.all_converged && s.converged;
  };
  auto finish = [&](const AlphaSolution& s, bool equal) {
    res.alpha_bar = s.alpha;
    res.policy = s.policy;
    res.throughput = s.throughput;
    res.converged = equal;
    return res;
  };

  res.lo = solve(0.0, nullptr);
  record(res.lo);
  if (balanced(res.lo.throughput, opts.epsilon_fair)) return finish(res.lo, true);
  res.hi = solve(1.0, opts.warm_start ? &res.lo.K : nullptr);
  record(res.hi);
  if (balanced(res.hi.throughput, opts.epsilon_fair)) return finish(res.hi, true);
  // Device 1 ahead even when it is ignored, or behind when it is the only
  // objective: the extreme weight is the fairest deterministic choice.
  if (imbalance(res.lo.throughput) > 0.0) return finish(res.lo, false);
  if (imbalance(res.hi.throughput) < 0.0) return finish(res.hi, false);

  for (int it = 0; it < opts.max_bisect && res.hi.alpha - res.lo.alpha > opts.min_bracket; ++it) {
    const double mid = 0.5 * (res.lo.alpha + res.hi.alpha);
    const ValueFunction* warm = nullptr;
    if (opts.warm_start) warm = mid - res.lo.alpha <= res.hi.alpha - mid ? &res.lo.K : &res.hi.K;
    AlphaSolution s = solve(mid, warm);
    record(s);
    if (balanced(s.throughput, opts.epsilon_fair)) {
      res.lo = res.hi = s;
      return finish(s, true);
    }
    if (imbalance(s.throughput) > 0.0)
      res.hi = std::move(s);
    else
      res.lo = std::move(s);
  }

  // Time-share: lambda d_lo + (1 - lambda) d_hi = 0 with d = G1 - G2.
  const double d_lo = imbalance(res.lo.throughput);
  const double d_hi = imbalance(res.hi.throughput);
  res.lambda = d_hi / (d_hi - d_lo);
  res.mixed = true;
  res.alpha_bar = 0.5 * (res.lo.alpha + res.hi.alpha);
  res.policy = res.lo.policy;
  const double l = res.lambda;
  res.throughput = {l * res.lo.throughput.g1 + (1.0 - l) * res.hi.throughput.g1,
                    l * res.lo.throughput.g2 + (1.0 - l) * res.hi.throughput.g2};
  res.converged = false;
  return res;
}

FairResult find_fair_alpha(const ChannelPmf& pmf, const SystemParams& p, const GridSpec& g,
                           const FairOptions& opts, ViOptions vi) {
  return find_fair_alpha(make_exact_solver(pmf, p, g, vi), opts);
}

void write_fair_trace(std::ostream& os, const std::vector<FairTraceRow>& trace) {
  os << "step,alpha,G1_bps,G2_bps\n";
  os << std::setprecision(12);
  for (const auto& r : trace) os << r.step << ',' << r.alpha << ',' << r.g1 << ',' << r.g2 << '\n';
}

std::vector<RegionPoint> throughput_region(const AlphaSolver& solve,
                                           const std::vector<double>& alphas) {
  if (alphas.empty()) throw std::invalid_argument("alpha list is empty");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha outside [0, 1]");
  std::vector<RegionPoint> out;
  out.reserve(alphas.size());
  ValueFunction warm;
  bool have_warm = false;
  for (double a : alphas) {
    AlphaSolution s = solve(a, have_warm ? &warm : nullptr);
    out.push_back({a, s.throughput, s.converged});
    warm = std::move(s.K);
    have_warm = true;
  }
  return out;
}

std::vector<RegionPoint> throughput_region(const ChannelPmf& pmf, const SystemParams& p,
                                           const GridSpec& g, const std::vector<double>& alphas,
                                           ViOptions vi) {
  return throughput_region(make_exact_solver(pmf, p, g, vi), alphas);
}

}  // namespace wpcn
