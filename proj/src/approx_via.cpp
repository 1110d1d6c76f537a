#include "wpcn/approx_via.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <stdexcept>

namespace wpcn {

std::vector<std::size_t> LatticeSubset::states(const StateSpace& space) const {
  std::vector<std::size_t> out;
  out.reserve(rows.size() * cols.size());
  for (int r : rows)
    for (int c : cols) out.push_back(space.index(r, c));
  return out;
}

SubsetSchedule SubsetSchedule::fixed_lattice(int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  SubsetSchedule s;
  s.kind_ = Kind::kFixedLattice;
  s.stride_ = stride;
  return s;
}

SubsetSchedule SubsetSchedule::random(double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in (0, 1]");
  SubsetSchedule s;
  s.kind_ = Kind::kRandom;
  s.fraction_ = fraction;
  s.seed_ = seed;
  return s;
}

SubsetSchedule SubsetSchedule::full() { return {}; }

SubsetSchedule SubsetSchedule::default_for(const StateSpace& space) {
  (void)space;
  return fixed_lattice(2);
}

namespace {

std::vector<int> strided_levels(int top, int stride) {
  std::vector<int> v;
  for (int x = 0; x < top; x += stride) v.push_back(x);
  v.push_back(top);
  return v;
}

std::vector<int> random_levels(int top, double keep, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> v{0};
  for (int x = 1; x < top; ++x)
    if (u(rng) < keep) v.push_back(x);
  if (top > 0) v.push_back(top);
  return v;
}

}  // namespace

LatticeSubset SubsetSchedule::subset(int iteration, const StateSpace& space) const {
  const auto& bm = space.b_max();
  switch (kind_) {
    case Kind::kFull:
      return {strided_levels(bm[0], 1), strided_levels(bm[1], 1)};
    case Kind::kFixedLattice:
      return {strided_levels(bm[0], stride_), strided_levels(bm[1], stride_)};
    case Kind::kRandom: {
      std::seed_seq seq{seed_, static_cast<std::uint64_t>(iteration)};
      std::mt19937_64 rng(seq);
      const double keep = std::sqrt(fraction_);
      auto rows = random_levels(bm[0], keep, rng);
      auto cols = random_levels(bm[1], keep, rng);
      return {std::move(rows), std::move(cols)};
    }
  }
  throw std::logic_error("unknown schedule kind");
}

ValueFunction interpolate(const ValueFunction& K, const LatticeSubset& lattice) {
  const StateSpace& space = K.space();
  ValueFunction out(space);
  const auto& R = lattice.rows;
  const auto& C = lattice.cols;
  // Bracketing lattice indices for every level of each axis.
  auto brackets = [](const std::vector<int>& levels, int top) {
    std::vector<std::pair<std::size_t, double>> out(top + 1);
    std::size_t k = 0;
    for (int x = 0; x <= top; ++x) {
      while (k + 1 < levels.size() && levels[k + 1] <= x) ++k;
      if (k + 1 == levels.size()) {
        out[x] = {k == 0 ? 0 : k - 1, k == 0 ? 0.0 : 1.0};
      } else {
        const double w = static_cast<double>(x - levels[k]) / (levels[k + 1] - levels[k]);
        out[x] = {k, w};
      }
    }
    return out;
  };
  const auto& bm = space.b_max();
  const auto br = brackets(R, bm[0]);
  const auto bc = brackets(C, bm[1]);
  for (int b1 = 0; b1 <= bm[0]; ++b1)
    for (int b2 = 0; b2 <= bm[1]; ++b2) {
      const auto [i, wr] = br[b1];
      const auto [j, wc] = bc[b2];
      const int r0 = R[i], r1 = R[std::min(i + 1, R.size() - 1)];
      const int c0 = C[j], c1 = C[std::min(j + 1, C.size() - 1)];
      const double v00 = K.at({r0, c0}), v01 = K.at({r0, c1});
      const double v10 = K.at({r1, c0}), v11 = K.at({r1, c1});
      double v = (1 - wr) * ((1 - wc) * v00 + wc * v01) + wr * ((1 - wc) * v10 + wc * v11);
      // Lattice points are copied exactly.
      if (wr == 0.0 && wc == 0.0) v = v00;
      out.at({b1, b2}) = v;
    }
  return out;
}

AvResult approx_value_iteration(const BellmanOperator& op, const SystemParams& p,
                                const SubsetSchedule& schedule, const AvOptions& opts) {
  const StateSpace& space = op.space();
  const double tol = opts.tol >= 0.0 ? opts.tol : default_tolerance(p);
  const std::size_t anchor = space.index(0, 0);
  AvResult res;
  res.K = opts.warm_start && opts.warm_start->space() == space ? *opts.warm_start
                                                                : ValueFunction(space);
  if (opts.anchor) res.K.shift(-res.K[anchor]);

  std::mt19937_64 audit_rng(opts.audit_seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ValueFunction exact(space);
  std::vector<char> on_lattice(space.size());

  for (int it = 1; it <= opts.max_iters; ++it) {
    const LatticeSubset lattice = schedule.subset(it, space);
    const auto subset = lattice.states(space);
    std::fill(on_lattice.begin(), on_lattice.end(), 0);
    for (auto s : subset) on_lattice[s] = 1;
    std::vector<std::size_t> evaluate = subset;
    std::vector<std::size_t> audit;
    for (std::size_t s = 0; s < space.size(); ++s)
      if (!on_lattice[s] && (opts.audit_fraction >= 1.0 || u(audit_rng) < opts.audit_fraction))
        audit.push_back(s);
    evaluate.insert(evaluate.end(), audit.begin(), audit.end());

    op.apply_subset(res.K, evaluate, exact, opts.kernel);
    ValueFunction next = interpolate(exact, lattice);
    double eps = 0.0;
    for (auto s : audit) eps = std::max(eps, std::abs(next[s] - exact[s]));
    res.epsilon = std::max(res.epsilon, eps);

    double lo = next[0] - res.K[0], hi = lo;
    for (std::size_t s = 1; s < space.size(); ++s) {
      const double d = next[s] - res.K[s];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    res.gain = 0.5 * (lo + hi);
    const double span = hi - lo;
    res.trace.push_back({it, subset.size(), eps, span});
    res.K = std::move(next);
    if (opts.anchor) res.K.shift(-res.K[anchor]);
    if (opts.keep_iterates) res.iterates.push_back(res.K);
    res.iterations = it;
    if (tol > 0.0 && span < tol) {
      res.converged = true;
      break;
    }
  }
  res.policy = op.greedy_policy(res.K, opts.kernel);
  return res;
}

AvResult approx_value_iteration(double alpha, const ChannelPmf& pmf, const SystemParams& p,
                                const GridSpec& g, const SubsetSchedule& schedule,
                                const AvOptions& opts) {
  const BellmanOperator op(p, g, pmf, alpha);
  return approx_value_iteration(op, p, schedule, opts);
}

bool verify_bound(const ValueFunction& exact, const ValueFunction& approx, int n, double epsilon) {
  const double d = sup_distance(exact, approx);
  const double bound = n * epsilon;
  return d <= bound + 1e-12 * std::max(1.0, std::abs(exact.max()) + std::abs(exact.min()));
}

void write_av_trace(std::ostream& os, const std::vector<AvTraceRow>& trace) {
  os << "iteration,subset_size,epsilon,span\n";
  os << std::setprecision(12);
  for (const auto& r : trace)
    os << r.iteration << ',' << r.subset_size << ',' << r.epsilon << ',' << r.span << '\n';
}

AlphaSolver make_approx_solver(const ChannelPmf& pmf, const SystemParams& p, const GridSpec& g,
                               SubsetSchedule schedule, AvOptions av) {
  return [pmf, p, g, schedule, av](double alpha, const ValueFunction* warm) {
    AvOptions o = av;
    o.warm_start = warm;
    const BellmanOperator op(p, g, pmf, alpha);
    AvResult r = approx_value_iteration(op, p, schedule, o);
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

}  // namespace wpcn
