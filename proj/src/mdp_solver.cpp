#include "wpcn/mdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wpcn {

double default_tolerance(const SystemParams& p) { return 1e-6 * p.slot; }

ViResult value_iteration(double alpha, const ChannelPmf& pmf, const SystemParams& p,
                         const GridSpec& g, const ViOptions& opts) {
  const BellmanOperator op(p, g, pmf, alpha, opts.optimizer);
  return value_iteration(op, p, opts);
}

ViResult value_iteration(const BellmanOperator& op, const SystemParams& p, const ViOptions& opts) {
  if (opts.relaxation <= 0.0 || opts.relaxation > 1.0)
    throw std::invalid_argument("relaxation must lie in (0, 1]");
  const double tol = opts.tol >= 0.0 ? opts.tol : default_tolerance(p);
  const StateSpace& space = op.space();
  const std::size_t anchor = space.index(0, 0);

  ViResult res;
  res.K = opts.warm_start && opts.warm_start->space() == space ? *opts.warm_start
                                                                : ValueFunction(space);
  if (opts.anchor) res.K.shift(-res.K[anchor]);
  ValueFunction next(space), scratch(space);
  const double w = opts.relaxation;
  const bool mpi = opts.evaluation_sweeps > 0;
  Policy greedy;

  for (int it = 1; it <= opts.max_iters; ++it) {
    op.apply(res.K, next, mpi ? &greedy : nullptr, opts.kernel);
    double lo = next[0] - res.K[0], hi = lo;
    for (std::size_t s = 1; s < space.size(); ++s) {
      const double d = next[s] - res.K[s];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    res.span = hi - lo;
    res.gain = 0.5 * (hi + lo);
    if (opts.keep_trace) res.span_trace.push_back(res.span);
    for (std::size_t s = 0; s < space.size(); ++s)
      res.K[s] = w == 1.0 ? next[s] : (1.0 - w) * res.K[s] + w * next[s];
    if (opts.anchor) res.K.shift(-res.K[anchor]);
    res.iterations = it;
    if (tol > 0.0 && res.span < tol) {
      res.converged = true;
      break;
    }
    for (int m = 0; m < opts.evaluation_sweeps; ++m) {
      policy_backup(greedy, op.pmf(), op.alpha(), res.K, scratch);
      if (w != 1.0)
        for (std::size_t s = 0; s < space.size(); ++s) scratch[s] = (1.0 - w) * res.K[s] + w * scratch[s];
      std::swap(res.K, scratch);
      if (opts.anchor) res.K.shift(-res.K[anchor]);
    }
  }
  res.policy = op.greedy_policy(res.K, opts.kernel);
  return res;
}

void policy_backup(const Policy& policy, const ChannelPmf& pmf, double alpha,
                   const ValueFunction& K, ValueFunction& out) {
  const StateSpace& space = policy.space();
  if (!(out.space() == space)) out = ValueFunction(space);
  for (std::size_t s = 0; s < space.size(); ++s) {
    const BatteryState b = space.state(s);
    double acc = 0.0;
    for (std::size_t c = 0; c < pmf.size(); ++c) {
      const Decision& d = policy.at(s, c);
      acc += pmf[c].prob * (alpha * d.reward[0] + (1.0 - alpha) * d.reward[1] +
                            K.at(d.next(b, space.b_max())));
    }
    out[s] = acc;
  }
}

SparseChain induced_chain(const Policy& policy, const ChannelPmf& pmf) {
  const StateSpace& space = policy.space();
  if (policy.num_channels() != pmf.size()) throw std::invalid_argument("policy/pmf size mismatch");
  SparseChain chain(space.size());
  for (std::size_t s = 0; s < space.size(); ++s) {
    const BatteryState b = space.state(s);
    for (std::size_t c = 0; c < pmf.size(); ++c) {
      const Decision& d = policy.at(s, c);
      if (d.spent[0] > b.b1 || d.spent[1] > b.b2)
        throw std::invalid_argument("policy spends more energy than stored");
      chain.add(s, space.index(d.next(b, space.b_max())), pmf[c].prob);
    }
  }
  return chain;
}

PolicyEvaluation evaluate_policy(const Policy& policy, const ChannelPmf& pmf,
                                 const SystemParams& p) {
  const StateSpace& space = policy.space();
  const SparseChain chain = induced_chain(policy, pmf);
  const auto limit = limit_distribution(chain, space.index(space.full()));
  PolicyEvaluation ev;
  ev.occupancy = limit.pi;
  ev.multichain = limit.multichain;
  ev.closed_classes = limit.reachable_closed_classes;
  ev.stationary_residual = fixed_point_residual(chain, limit.pi);
  for (std::size_t s = 0; s < space.size(); ++s) {
    if (limit.pi[s] == 0.0) continue;
    for (std::size_t c = 0; c < pmf.size(); ++c) {
      const Decision& d = policy.at(s, c);
      for (int i = 0; i < 2; ++i) ev.slot_reward[i] += limit.pi[s] * pmf[c].prob * d.reward[i];
    }
  }
  ev.throughput = {to_bps(ev.slot_reward[0], p), to_bps(ev.slot_reward[1], p)};
  return ev;
}

SlotDivision slot_division(const Policy& policy, const ChannelPmf& pmf, const SystemParams& p,
                           const std::vector<double>& occupancy) {
  const StateSpace& space = policy.space();
  SlotDivision out;
  std::array<double, 2> rho_weight{};
  for (std::size_t s = 0; s < space.size(); ++s) {
    if (occupancy[s] == 0.0) continue;
    for (std::size_t c = 0; c < pmf.size(); ++c) {
      const double w = occupancy[s] * pmf[c].prob;
      const Action& a = policy.at(s, c).action;
      const double tau[2] = {a.tau1, a.tau2};
      const double rho[2] = {a.rho1, a.rho2};
      const double q[2] = {a.q1, a.q2};
      for (int i = 0; i < 2; ++i) {
        out.tau[i] += w * tau[i];
        out.q_fraction[i] += w * q[i] / p.q_max;
        if (tau[i] > 0.0) {
          out.rho[i] += w * rho[i];
          rho_weight[i] += w;
        }
      }
      out.tau_ap += w * a.tau_ap;
    }
  }
  for (int i = 0; i < 2; ++i) {
    out.transmit_probability[i] = rho_weight[i];
    if (rho_weight[i] > 0.0) out.rho[i] /= rho_weight[i];
  }
  return out;
}

}  // namespace wpcn
