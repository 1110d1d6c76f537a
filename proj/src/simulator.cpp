#include "wpcn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

namespace wpcn {

ChannelSampler::ChannelSampler(const ChannelPmf& pmf) {
  if (pmf.size() == 0) throw std::invalid_argument("empty channel pmf");
  cdf_.reserve(pmf.size());
  double acc = 0.0;
  for (const auto& o : pmf.outcomes) {
    acc += o.prob;
    cdf_.push_back(acc);
  }
  for (auto& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

std::size_t ChannelSampler::operator()(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

double uniform01(std::uint64_t word) { return static_cast<double>(word >> 11) * 0x1.0p-53; }

SimulationResult simulate(const DecisionRule& rule, const ChannelPmf& pmf, const SystemParams& p,
                          const GridSpec& g, const SimulationOptions& opts) {
  if (opts.n_slots < 1) throw std::invalid_argument("n_slots must be >= 1");
  const StateSpace space(g);
  const ChannelSampler sample(pmf);
  std::seed_seq seq{opts.seed, std::uint64_t{0}};
  std::mt19937_64 rng(seq);

  const auto burn = static_cast<std::uint64_t>(opts.burn_in_fraction * opts.n_slots);
  const std::uint64_t measured = std::max<std::uint64_t>(1, opts.n_slots - std::min(burn, opts.n_slots - 1));
  const int n_batches = static_cast<int>(std::min<std::uint64_t>(std::max(opts.n_batches, 1), measured));
  const std::uint64_t batch_len = measured / n_batches;

  SimulationResult res;
  res.occupancy.assign(space.size(), 0.0);
  std::vector<std::array<double, 2>> batch(n_batches, {0.0, 0.0});
  std::array<double, 2> total{0.0, 0.0};
  BatteryState b = space.full();
  const auto& bm = space.b_max();

  if (opts.trajectory)
    *opts.trajectory << "slot,b1,b2,channel,tau1_s,tau2_s,tau_ap_s,rho1_W,rho2_W,Q1_W,Q2_W,"
                        "reward1,reward2\n";

  const std::uint64_t start = opts.n_slots - measured;
  for (std::uint64_t t = 0; t < opts.n_slots; ++t) {
    const std::size_t c = sample(uniform01(rng()));
    const Decision d = rule(b, c);
    if (opts.check_feasibility) {
      const std::array<double, 2> stored{b.b1 * quantum(p, g, 0), b.b2 * quantum(p, g, 1)};
      const bool ok = d.spent[0] >= 0 && d.spent[1] >= 0 && d.spent[0] <= b.b1 &&
                      d.spent[1] <= b.b2 && action_feasible(d.action, p, stored, 1e-9);
      if (!ok) {
        std::ostringstream msg;
        msg << "infeasible action at battery state (" << b.b1 << ", " << b.b2 << "), channel "
            << c;
        throw std::runtime_error(msg.str());
      }
    }
    if (opts.trajectory) {
      auto& os = *opts.trajectory;
      os << std::setprecision(10) << t << ',' << b.b1 << ',' << b.b2 << ',' << c << ','
         << d.action.tau1 << ',' << d.action.tau2 << ',' << d.action.tau_ap << ','
         << d.action.rho1 << ',' << d.action.rho2 << ',' << d.action.q1 << ',' << d.action.q2
         << ',' << d.reward[0] << ',' << d.reward[1] << '\n';
    }
    if (t >= start) {
      const std::uint64_t k = t - start;
      const auto bi = std::min<std::uint64_t>(k / std::max<std::uint64_t>(batch_len, 1), n_batches - 1);
      for (int i = 0; i < 2; ++i) {
        batch[bi][i] += d.reward[i];
        total[i] += d.reward[i];
      }
      res.occupancy[space.index(b)] += 1.0;
    }
    b = d.next(b, bm);
    if (b.b1 < 0 || b.b2 < 0 || b.b1 > bm[0] || b.b2 > bm[1])
      throw std::logic_error("battery left its range");
  }

  res.measured_slots = measured;
  for (auto& o : res.occupancy) o /= static_cast<double>(measured);
  std::array<double, 2> mean{total[0] / measured, total[1] / measured};
  std::array<double, 2> se{0.0, 0.0};
  if (n_batches > 1) {
    // Batch lengths: all equal except the last, which takes the remainder.
    for (int i = 0; i < 2; ++i) {
      double ss = 0.0;
      for (int k = 0; k < n_batches; ++k) {
        const double len = k + 1 < n_batches ? batch_len : measured - batch_len * (n_batches - 1);
        const double m = batch[k][i] / len;
        ss += (m - mean[i]) * (m - mean[i]);
      }
      se[i] = std::sqrt(ss / (n_batches - 1) / n_batches);
    }
  }
  res.throughput = {to_bps(mean[0], p), to_bps(mean[1], p)};
  res.std_error = {to_bps(se[0], p), to_bps(se[1], p)};
  return res;
}

}  // namespace wpcn
