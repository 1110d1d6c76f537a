#include "wpcn/action_optimizer.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <functional>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace wpcn {

namespace {

// d/dtau [tau * ln(1 + c / tau)]; positive and decreasing in tau.
double marginal_time_value(double c, double tau) {
  if (c <= 0.0) return 0.0;
  return std::log1p(c / tau) - c / (tau + c);
}

double find_root_decreasing(const std::function<double(double)>& f, double lo, double hi,
                            double f_lo, double f_hi) {
  std::uintmax_t max_iter = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), max_iter);
  return 0.5 * (r.first + r.second);
}

struct Candidate {
  double value = -std::numeric_limits<double>::infinity();
  double tau_ap = 0.0;
  int esum = 0;
  int k = 0;  // -1 - family for an energy-tight candidate
  int e1 = 0, e2 = 0, j = 0;
  bool valid = false;
};

bool improves(const Candidate& c, const Candidate& best, double slot) {
  if (!best.valid) return true;
  const double tol = 1e-12 * std::max(1.0, std::abs(best.value));
  if (c.value > best.value + tol) return true;
  if (c.value < best.value - tol) return false;
  const double t_tol = 1e-12 * slot;
  if (c.tau_ap > best.tau_ap + t_tol) return true;
  if (c.tau_ap < best.tau_ap - t_tol) return false;
  return c.esum < best.esum;
}

}  // namespace

double tau1_derivative(double tau1, double e1, double e2, double tau_ap, double h1, double h2,
                       double alpha, const SystemParams& p) {
  const double window = p.slot - tau_ap;
  const double c1 = h1 * e1 / p.noise;
  const double c2 = h2 * e2 / p.noise;
  return alpha * marginal_time_value(c1, tau1) - (1.0 - alpha) * marginal_time_value(c2, window - tau1);
}

std::optional<double> tau1_unconstrained_root(double e1, double e2, double tau_ap, double h1,
                                              double h2, double alpha, const SystemParams& p) {
  if (!(alpha > 0.0 && alpha < 1.0) || e1 <= 0.0 || e2 <= 0.0 || h1 <= 0.0 || h2 <= 0.0)
    return std::nullopt;
  const double window = p.slot - tau_ap;
  if (window <= 0.0) return std::nullopt;
  const double c1 = h1 * e1 / p.noise;
  const double c2 = h2 * e2 / p.noise;
  const double half = 0.5 * window;
  const double f_half = alpha * marginal_time_value(c1, half) -
                        (1.0 - alpha) * marginal_time_value(c2, half);
  if (f_half == 0.0) return half;
  // Solve for the duration of whichever device ends up with less than half
  // the window, so a root next to either end keeps its relative precision.
  const bool second_short = f_half > 0.0;
  auto g = [&](double t) {
    return second_short
               ? (1.0 - alpha) * marginal_time_value(c2, t) - alpha * marginal_time_value(c1, window - t)
               : alpha * marginal_time_value(c1, t) - (1.0 - alpha) * marginal_time_value(c2, window - t);
  };
  // g decreases from +inf at 0 to a negative value at half.
  double hi = half, g_hi = g(hi);
  double lo = half, g_lo = g_hi;
  for (int it = 0; it < 120 && g_lo <= 0.0; ++it) {
    hi = lo;
    g_hi = g_lo;
    lo *= 1e-3;
    g_lo = g(lo);
  }
  if (!(g_lo > 0.0) || !(g_hi < 0.0) || !std::isfinite(g_lo)) return std::nullopt;
  std::uintmax_t max_iter = 200;
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi,
                                                   boost::math::tools::eps_tolerance<double>(50),
                                                   max_iter);
  const double t = 0.5 * (r.first + r.second);
  return second_short ? window - t : t;
}

std::optional<SplitSolution> solve_tau1(double e1, double e2, double tau_ap, double h1, double h2,
                                        double alpha, const SystemParams& p) {
  if (e1 <= 0.0 || e2 <= 0.0) throw std::invalid_argument("solve_tau1 needs E1, E2 > 0");
  const double window = p.slot - tau_ap;
  if (window <= 0.0) return std::nullopt;
  const auto& d1 = p.dev[0];
  const auto& d2 = p.dev[1];
  double lo = std::max(e1 / d1.p_max, window - e2 / d2.p_min);
  double hi = std::min(e1 / d1.p_min, window - e2 / d2.p_max);
  const double slack = 1e-12 * p.slot;
  if (lo > hi + slack) return std::nullopt;
  if (lo > hi) lo = hi;

  auto f = [&](double t) { return tau1_derivative(t, e1, e2, tau_ap, h1, h2, alpha, p); };
  SplitSolution s;
  s.feasible = true;
  if (hi - lo <= slack) {
    s.tau1 = lo;
  } else {
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo <= 0.0) {
      s.tau1 = lo;
    } else if (f_hi >= 0.0) {
      s.tau1 = hi;
    } else {
      s.tau1 = find_root_decreasing(f, lo, hi, f_lo, f_hi);
      s.interior = true;
    }
  }
  s.tau2 = window - s.tau1;
  s.rho1 = e1 / s.tau1;
  s.rho2 = e2 / s.tau2;
  // Clamp representation error back into the power box.
  s.rho1 = std::clamp(s.rho1, d1.p_min, d1.p_max);
  s.rho2 = std::clamp(s.rho2, d2.p_min, d2.p_max);
  s.r1 = s.tau1 * rate(s.rho1, h1, p);
  s.r2 = s.tau2 * rate(s.rho2, h2, p);
  s.objective = alpha * s.r1 + (1.0 - alpha) * s.r2;
  return s;
}

SplitSolution split_transmission(double e1, double e2, double tau_ap, double h1, double h2,
                                 double alpha, const SystemParams& p) {
  SplitSolution s;
  const double window = p.slot - tau_ap;
  if (window < -1e-12 * p.slot) return s;
  if (e1 <= 0.0 && e2 <= 0.0) {
    s.feasible = true;
    return s;
  }
  if (e1 > 0.0 && e2 > 0.0) {
    auto r = solve_tau1(e1, e2, tau_ap, h1, h2, alpha, p);
    return r ? *r : s;
  }
  // One transmitter: the longest duration the power box allows.
  const int i = e1 > 0.0 ? 0 : 1;
  const double e = i == 0 ? e1 : e2;
  const double h = i == 0 ? h1 : h2;
  const auto& d = p.dev[i];
  const double tau = std::min(std::max(window, 0.0), e / d.p_min);
  if (tau <= 0.0 || tau < (e / d.p_max) * (1.0 - 1e-12)) return s;
  const double rho = std::clamp(e / tau, d.p_min, d.p_max);
  const double r = tau * rate(rho, h, p);
  s.feasible = true;
  if (i == 0) {
    s.tau1 = tau;
    s.rho1 = rho;
    s.r1 = r;
  } else {
    s.tau2 = tau;
    s.rho2 = rho;
    s.r2 = r;
  }
  s.objective = alpha * s.r1 + (1.0 - alpha) * s.r2;
  return s;
}

ActionTable::ActionTable(const SystemParams& p, const GridSpec& g, const ChannelOutcome& ch,
                         double alpha, const OptimizerOptions& opts)
    : q_max_(p.q_max),
      channel_(ch),
      alpha_(alpha),
      tight_flag_(opts.energy_tight_candidates),
      n_tau_(g.n_tauap_grid),
      n_q_(g.n_q1_grid),
      e_rows_(static_cast<std::size_t>(g.b_max[0] + 1)),
      e_cols_(static_cast<std::size_t>(g.b_max[1] + 1)) {
  tau_grid_.resize(n_tau_);
  for (int k = 0; k < n_tau_; ++k) tau_grid_[k] = grid_point(p.slot, k, n_tau_);
  q_grid_.resize(n_q_);
  for (int j = 0; j < n_q_; ++j) q_grid_[j] = grid_point(p.q_max, j, n_q_);

  const double unit[2] = {quantum(p, g, 0), quantum(p, g, 1)};
  const auto& h = ch.h;

  splits_.resize(static_cast<std::size_t>(n_tau_) * e_rows_ * e_cols_);
  for (int k = 0; k < n_tau_; ++k)
    for (std::size_t e1 = 0; e1 < e_rows_; ++e1)
      for (std::size_t e2 = 0; e2 < e_cols_; ++e2)
        splits_[(k * e_rows_ + e1) * e_cols_ + e2] =
            split_transmission(e1 * unit[0], e2 * unit[1], tau_grid_[k], h[0], h[1], alpha, p);

  for (int i = 0; i < 2; ++i) {
    harvest_[i].resize(static_cast<std::size_t>(n_tau_) * n_q_);
    for (int k = 0; k < n_tau_; ++k)
      for (int j = 0; j < n_q_; ++j) {
        const double q = i == 0 ? q_grid_[j] : p.q_max - q_grid_[j];
        harvest_[i][k * n_q_ + j] =
            harvest_quanta(harvested_energy(tau_grid_[k], q, ch.g[i], p), p, g, i);
      }
  }

  if (!tight_flag_) return;
  const std::size_t n_e = e_rows_ * e_cols_;
  for (int f = 0; f < kTightFamilies; ++f) {
    auto& fam = tight_[f];
    fam.tau.assign(n_e, -1.0);
    fam.split.assign(n_e, SplitSolution{});
    for (int i = 0; i < 2; ++i) fam.harvest[i].assign(n_e * n_q_, 0);
    for (std::size_t e1 = 0; e1 < e_rows_; ++e1)
      for (std::size_t e2 = 0; e2 < e_cols_; ++e2) {
        const double en1 = e1 * unit[0], en2 = e2 * unit[1];
        // Family 0 transmits at P_max (longest downlink), family 1 at
        // P_min (longest uplink the energies allow).
        const double rho1 = f == 0 ? p.dev[0].p_max : p.dev[0].p_min;
        const double rho2 = f == 0 ? p.dev[1].p_max : p.dev[1].p_min;
        const double t1 = en1 / rho1, t2 = en2 / rho2;
        const double tau_ap = p.slot - t1 - t2;
        if (tau_ap < 0.0) continue;
        const std::size_t idx = e1 * e_cols_ + e2;
        fam.tau[idx] = tau_ap;
        SplitSolution s;
        s.feasible = true;
        s.tau1 = t1;
        s.tau2 = t2;
        s.rho1 = e1 > 0 ? rho1 : 0.0;
        s.rho2 = e2 > 0 ? rho2 : 0.0;
        s.r1 = t1 * rate(s.rho1, h[0], p);
        s.r2 = t2 * rate(s.rho2, h[1], p);
        s.objective = alpha * s.r1 + (1.0 - alpha) * s.r2;
        fam.split[idx] = s;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < n_q_; ++j) {
            const double q = i == 0 ? q_grid_[j] : p.q_max - q_grid_[j];
            fam.harvest[i][idx * n_q_ + j] =
                harvest_quanta(harvested_energy(tau_ap, q, ch.g[i], p), p, g, i);
          }
      }
  }
}

Decision ActionTable::decision(int k, int e1, int e2, int j) const {
  const bool tight = k < 0;
  const int f = tight ? -k - 1 : 0;
  const SplitSolution& s = tight ? tight_split(e1, e2, f) : split(k, e1, e2);
  Decision d;
  d.action.tau1 = s.tau1;
  d.action.tau2 = s.tau2;
  d.action.rho1 = s.rho1;
  d.action.rho2 = s.rho2;
  d.action.tau_ap = tight ? tight_tau_ap(e1, e2, f) : tau_ap(k);
  d.action.q1 = q1(j);
  d.action.q2 = q_max_ - q1(j);
  d.spent = {e1, e2};
  for (int i = 0; i < 2; ++i) d.harvested[i] = tight ? tight_harvest(i, e1, e2, j, f) : harvest(i, k, j);
  d.reward = {s.r1, s.r2};
  return d;
}

void ContinuationTable::build(const ActionTable& table, const ValueFunction& K) {
  const StateSpace& space = K.space();
  const auto& bm = space.b_max();
  n_states_ = space.size();
  const int n_tau = table.n_tau();
  const int n_q = table.n_q();
  value_.assign(static_cast<std::size_t>(n_tau) * n_states_, 0.0);
  arg_.assign(static_cast<std::size_t>(n_tau) * n_states_, 0);
  for (int k = 0; k < n_tau; ++k) {
    for (std::size_t s = 0; s < n_states_; ++s) {
      const BatteryState n = space.state(s);
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int j = 0; j < n_q; ++j) {
        const int b1 = battery_step_quanta(n.b1, 0, table.harvest(0, k, j), bm[0]);
        const int b2 = battery_step_quanta(n.b2, 0, table.harvest(1, k, j), bm[1]);
        const double v = K[space.index(b1, b2)];
        if (v > best) {
          best = v;
          arg = j;
        }
      }
      value_[k * n_states_ + s] = best;
      arg_[k * n_states_ + s] = arg;
    }
  }
}

StateSearchResult search_state(const ActionTable& table, const ContinuationTable& cont,
                               const ValueFunction& K, BatteryState b) {
  const StateSpace& space = K.space();
  const auto& bm = space.b_max();
  const double slot = table.tau_ap(table.n_tau() - 1);
  Candidate best;
  for (int k = table.n_tau() - 1; k >= 0; --k) {
    const double tau_ap = table.tau_ap(k);
    for (int e1 = 0; e1 <= b.b1; ++e1)
      for (int e2 = 0; e2 <= b.b2; ++e2) {
        const SplitSolution& s = table.split(k, e1, e2);
        if (!s.feasible) continue;
        const std::size_t residual = space.index(b.b1 - e1, b.b2 - e2);
        Candidate c{s.objective + cont.value(k, residual), tau_ap, e1 + e2, k, e1, e2,
                    cont.q_index(k, residual), true};
        if (improves(c, best, slot)) best = c;
      }
  }
  for (int f = 0; f < table.num_tight_families(); ++f)
    for (int e1 = 0; e1 <= b.b1; ++e1)
      for (int e2 = 0; e2 <= b.b2; ++e2) {
        const double tau_ap = table.tight_tau_ap(e1, e2, f);
        if (tau_ap < 0.0) continue;
        const SplitSolution& s = table.tight_split(e1, e2, f);
        for (int j = 0; j < table.n_q(); ++j) {
          const int n1 = battery_step_quanta(b.b1, e1, table.tight_harvest(0, e1, e2, j, f), bm[0]);
          const int n2 = battery_step_quanta(b.b2, e2, table.tight_harvest(1, e1, e2, j, f), bm[1]);
          Candidate c{s.objective + K[space.index(n1, n2)], tau_ap, e1 + e2, -1 - f, e1, e2, j,
                      true};
          if (improves(c, best, slot)) best = c;
        }
      }
  // e = (0, 0) at tau_ap = T is always feasible, so best is valid here.
  return {table.decision(best.k, best.e1, best.e2, best.j), best.value};
}

StateSearchResult optimize_state(BatteryState b, const ChannelOutcome& ch, double alpha,
                                 const ValueFunction& K, const SystemParams& p, const GridSpec& g,
                                 const OptimizerOptions& opts) {
  const ActionTable table(p, g, ch, alpha, opts);
  ContinuationTable cont;
  cont.build(table, K);
  return search_state(table, cont, K, b);
}

EnergyRect prune_bounds(std::array<int, 2> e_star, BatteryState b) {
  return {e_star[0], b.b1, 0, e_star[1]};
}

EnergyChoice best_energy_split(const ActionTable& table, const ValueFunction& K, BatteryState b,
                               int k, int j, const EnergyRect& rect) {
  const StateSpace& space = K.space();
  const auto& bm = space.b_max();
  const int c1 = table.harvest(0, k, j);
  const int c2 = table.harvest(1, k, j);
  EnergyChoice best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int e1 = std::max(0, rect.e1_lo); e1 <= std::min(b.b1, rect.e1_hi); ++e1)
    for (int e2 = std::max(0, rect.e2_lo); e2 <= std::min(b.b2, rect.e2_hi); ++e2) {
      const SplitSolution& s = table.split(k, e1, e2);
      if (!s.feasible) continue;
      const double v = s.objective + K[space.index(battery_step_quanta(b.b1, e1, c1, bm[0]),
                                                  battery_step_quanta(b.b2, e2, c2, bm[1]))];
      if (v > best.value) best = {e1, e2, v, true};
    }
  return best;
}

std::vector<EnergyChoice> energy_splits_along_chain(std::span<const ActionTable* const> chain,
                                                    const ValueFunction& K, BatteryState b, int k,
                                                    int j, bool prune) {
  std::vector<EnergyChoice> out;
  out.reserve(chain.size());
  for (const ActionTable* t : chain) {
    EnergyRect rect = full_rect(b);
    if (prune && !out.empty() && out.back().feasible)
      rect = prune_bounds({out.back().e1, out.back().e2}, b);
    out.push_back(best_energy_split(*t, K, b, k, j, rect));
  }
  return out;
}

StateSearchResult low_snr_fast_path(BatteryState b, const ChannelOutcome& ch, double alpha,
                                    const ValueFunction& K, const SystemParams& p,
                                    const GridSpec& g, double snr_threshold, bool* used_fast_path) {
  const bool low_snr = ch.h[0] * p.dev[0].p_max / p.noise < snr_threshold &&
                       ch.h[1] * p.dev[1].p_max / p.noise < snr_threshold;
  if (used_fast_path) *used_fast_path = low_snr;
  if (!low_snr) return optimize_state(b, ch, alpha, K, p, g);

  const StateSpace& space = K.space();
  const auto& bm = space.b_max();
  const double unit[2] = {quantum(p, g, 0), quantum(p, g, 1)};
  const double to_base = 1.0 / std::log(kRateLogBase);
  const int n_q = g.n_q1_grid;

  Candidate best;
  for (int e1 = 0; e1 <= b.b1; ++e1)
    for (int e2 = 0; e2 <= b.b2; ++e2) {
      const double en1 = e1 * unit[0], en2 = e2 * unit[1];
      const double tau_ap = p.slot - en1 / p.dev[0].p_max - en2 / p.dev[1].p_max;
      if (tau_ap < 0.0) continue;
      const double linear =
          (alpha * en1 * ch.h[0] + (1.0 - alpha) * en2 * ch.h[1]) / p.noise * to_base;
      for (int j = 0; j < n_q; ++j) {
        const double q1 = grid_point(p.q_max, j, n_q);
        const int c1 = harvest_quanta(harvested_energy(tau_ap, q1, ch.g[0], p), p, g, 0);
        const int c2 = harvest_quanta(harvested_energy(tau_ap, p.q_max - q1, ch.g[1], p), p, g, 1);
        const double v = linear + K[space.index(battery_step_quanta(b.b1, e1, c1, bm[0]),
                                                battery_step_quanta(b.b2, e2, c2, bm[1]))];
        Candidate c{v, tau_ap, e1 + e2, -1, e1, e2, j, true};
        if (improves(c, best, p.slot)) best = c;
      }
    }

  const double en1 = best.e1 * unit[0], en2 = best.e2 * unit[1];
  Decision d;
  d.action.tau1 = en1 / p.dev[0].p_max;
  d.action.tau2 = en2 / p.dev[1].p_max;
  d.action.tau_ap = p.slot - d.action.tau1 - d.action.tau2;
  d.action.rho1 = best.e1 > 0 ? p.dev[0].p_max : 0.0;
  d.action.rho2 = best.e2 > 0 ? p.dev[1].p_max : 0.0;
  d.action.q1 = grid_point(p.q_max, best.j, n_q);
  d.action.q2 = p.q_max - d.action.q1;
  d.spent = {best.e1, best.e2};
  d.harvested = {harvest_quanta(harvested_energy(d.action.tau_ap, d.action.q1, ch.g[0], p), p, g, 0),
                 harvest_quanta(harvested_energy(d.action.tau_ap, d.action.q2, ch.g[1], p), p, g, 1)};
  d.reward = {d.action.tau1 * rate(d.action.rho1, ch.h[0], p),
              d.action.tau2 * rate(d.action.rho2, ch.h[1], p)};
  const double value = alpha * d.reward[0] + (1.0 - alpha) * d.reward[1] +
                       K.at(d.next(b, bm));
  return {d, value};
}

}  // namespace wpcn
