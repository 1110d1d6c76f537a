#include "wpcn/slot_oriented.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace wpcn {

namespace {

template <class F>
double bracketed_root(F f, double lo, double hi, double f_lo, double f_hi) {
  std::uintmax_t max_iter = 300;
  auto stop = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(std::abs(a), std::abs(b)); };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, stop, max_iter);
  return 0.5 * (r.first + r.second);
}

// Battery-limited reward per slot at power rho: B_max R(rho) / rho.
double battery_cap(double rho, double h, const DeviceParams& d, const SystemParams& p) {
  return d.b_max * rate(rho, h, p) / rho;
}

// Largest power in [P_min, P_max] whose battery cap still admits reward t;
// negative when even P_min does not.
double max_power_for(double t, double h, const DeviceParams& d, const SystemParams& p) {
  if (battery_cap(d.p_min, h, d, p) < t) return -1.0;
  if (battery_cap(d.p_max, h, d, p) >= t) return d.p_max;
  auto f = [&](double rho) { return battery_cap(rho, h, d, p) - t; };
  return bracketed_root(f, d.p_min, d.p_max, f(d.p_min), f(d.p_max));
}

SlotSolution degenerate_solution(const SystemParams& p) {
  SlotSolution s;
  s.tau_ap = p.slot;
  s.q1 = s.q2 = 0.5 * p.q_max;
  s.degenerate = true;
  return s;
}

}  // namespace

std::string SlotSolution::csv_header() {
  return "tau1_s,tau2_s,tau_ap_s,rho1_W,rho2_W,Q1_W,Q2_W,reward_bits_per_Hz";
}

void SlotSolution::write_csv_row(std::ostream& os) const {
  const auto old = os.precision(17);
  os << tau1 << ',' << tau2 << ',' << tau_ap << ',' << rho1 << ',' << rho2 << ',' << q1 << ','
     << q2 << ',' << reward << '\n';
  os.precision(old);
}

double stationary_residual(double rho, double g, double h, const SystemParams& p) {
  const double lhs = p.eta * g * p.q_max + rho;
  const double rhs = (p.noise / h + rho) * std::log1p(h * rho / p.noise);
  return (rhs - lhs) / lhs;
}

double stationary_power(double g, double h, const SystemParams& p) {
  if (g <= 0.0 || h <= 0.0) throw std::invalid_argument("stationary_power needs positive gains");
  const double k = h / p.noise;
  const double c = p.eta * g * p.q_max;
  // ln(1 + k rho) - k (c + rho) / (1 + k rho): negative at 0, increasing.
  auto f = [&](double rho) { return std::log1p(k * rho) - k * (c + rho) / (1.0 + k * rho); };
  double hi = std::max(std::sqrt(2.0 * c / k), 1e-30);
  double f_hi = f(hi);
  while (f_hi <= 0.0) {
    hi *= 2.0;
    f_hi = f(hi);
  }
  double lo = hi;
  double f_lo = f_hi;
  while (f_lo > 0.0) {
    lo *= 0.5;
    f_lo = f(lo);
  }
  if (f_lo == 0.0) return lo;
  return bracketed_root(f, lo, hi, f_lo, f_hi);
}

double time_cost(double rho, double g, double h, const SystemParams& p) {
  const double c = p.eta * g * p.q_max;
  return (c + rho) / (c * rate(rho, h, p));
}

SlotSolution solve_slot(const ChannelOutcome& ch, const SystemParams& p) {
  for (int i = 0; i < 2; ++i)
    if (ch.g[i] <= 0.0 || ch.h[i] <= 0.0) return degenerate_solution(p);

  std::array<double, 2> rho0{};
  for (int i = 0; i < 2; ++i) rho0[i] = stationary_power(ch.g[i], ch.h[i], p);

  auto powers_for = [&](double t, std::array<double, 2>& rho) {
    for (int i = 0; i < 2; ++i) {
      const double hi = max_power_for(t, ch.h[i], p.dev[i], p);
      if (hi < 0.0) return false;
      rho[i] = std::clamp(rho0[i], p.dev[i].p_min, hi);
    }
    return true;
  };
  auto feasible = [&](double t, std::array<double, 2>& rho) {
    if (!powers_for(t, rho)) return false;
    const double used =
        t * (time_cost(rho[0], ch.g[0], ch.h[0], p) + time_cost(rho[1], ch.g[1], ch.h[1], p));
    return used <= p.slot;
  };

  double t_hi = p.slot / (time_cost(rho0[0], ch.g[0], ch.h[0], p) +
                          time_cost(rho0[1], ch.g[1], ch.h[1], p));
  for (int i = 0; i < 2; ++i)
    t_hi = std::min(t_hi, battery_cap(p.dev[i].p_min, ch.h[i], p.dev[i], p));

  std::array<double, 2> rho{};
  double t = t_hi;
  if (!feasible(t, rho)) {
    double lo = 0.0, hi = t_hi;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      std::array<double, 2> trial{};
      if (feasible(mid, trial))
        lo = mid;
      else
        hi = mid;
    }
    t = lo;
    if (t <= 0.0 || !powers_for(t, rho)) return degenerate_solution(p);
  }

  SlotSolution s;
  s.reward = t;
  s.rho1 = rho[0];
  s.rho2 = rho[1];
  s.interior = rho[0] == rho0[0] && rho[1] == rho0[1];
  const std::array<double, 2> r{rate(rho[0], ch.h[0], p), rate(rho[1], ch.h[1], p)};
  s.tau1 = t / r[0];
  s.tau2 = t / r[1];
  const std::array<double, 2> energy{s.tau1 * rho[0], s.tau2 * rho[1]};
  std::array<double, 2> work{};  // tau_ap * Q_i needed to deliver the energy
  for (int i = 0; i < 2; ++i) work[i] = energy[i] / (p.eta * ch.g[i]);
  s.tau_ap = p.slot - s.tau1 - s.tau2;
  const double needed = (work[0] + work[1]) / p.q_max;
  s.energy_wasted = s.tau_ap - needed > 1e-12 * p.slot;

  // Time left over is only possible when a battery is full at P_min; that
  // device absorbs the surplus harvest, the other receives exactly its need.
  std::array<bool, 2> full{};
  for (int i = 0; i < 2; ++i) full[i] = energy[i] >= p.dev[i].b_max * (1.0 - 1e-9);
  double q[2];
  if (s.energy_wasted && full[0] != full[1]) {
    const int j = full[0] ? 1 : 0;
    q[j] = work[j] / s.tau_ap;
    q[1 - j] = p.q_max - q[j];
  } else {
    q[0] = p.q_max * work[0] / (work[0] + work[1]);
    q[1] = p.q_max - q[0];
  }
  s.q1 = q[0];
  s.q2 = q[1];
  return s;
}

double slot_invariant_violation(const SlotSolution& s, const ChannelOutcome& ch,
                                const SystemParams& p) {
  double worst = std::abs(s.tau1 + s.tau2 + s.tau_ap - p.slot) / p.slot;
  worst = std::max(worst, std::abs(s.q1 + s.q2 - p.q_max) / p.q_max);
  if (s.degenerate) return worst;
  const double tau[2] = {s.tau1, s.tau2};
  const double rho[2] = {s.rho1, s.rho2};
  const double q[2] = {s.q1, s.q2};
  double rew[2];
  for (int i = 0; i < 2; ++i) {
    if (tau[i] < 0.0 || q[i] < 0.0 || s.tau_ap < 0.0) return std::numeric_limits<double>::infinity();
    rew[i] = tau[i] * rate(rho[i], ch.h[i], p);
    const auto& d = p.dev[i];
    const double e = tau[i] * rho[i];
    const double c = harvested_energy(s.tau_ap, q[i], ch.g[i], p);
    worst = std::max(worst, std::abs(e - std::min(c, d.b_max)) / e);
    worst = std::max(worst, (e - d.b_max) / d.b_max);
    worst = std::max(worst, (d.p_min - rho[i]) / d.p_min);
    worst = std::max(worst, (rho[i] - d.p_max) / d.p_max);
  }
  const double top = std::max(rew[0], rew[1]);
  worst = std::max(worst, std::abs(rew[0] - rew[1]) / top);
  worst = std::max(worst, std::abs(s.reward - rew[0]) / top);
  return worst;
}

double low_snr_slot_reward(const ChannelOutcome& ch, const SystemParams& p) {
  const double x1 = ch.g[0] * ch.h[0], x2 = ch.g[1] * ch.h[1];
  if (x1 <= 0.0 || x2 <= 0.0) return 0.0;
  const double s1 = std::sqrt(p.eta * x1 * p.q_max / p.noise);
  const double s2 = std::sqrt(p.eta * x2 * p.q_max / p.noise);
  const double nats = p.slot * p.eta * p.q_max * x1 * x2 / p.noise /
                      (x2 * (s1 / std::sqrt(2.0) + 1.0) + x1 * (s2 / std::sqrt(2.0) + 1.0));
  return nats / std::log(kRateLogBase);
}

SlotSolution solve_slot_low_snr(const ChannelOutcome& ch, const SystemParams& p) {
  for (int i = 0; i < 2; ++i)
    if (ch.g[i] <= 0.0 || ch.h[i] <= 0.0) return degenerate_solution(p);
  SlotSolution s;
  s.reward = low_snr_slot_reward(ch, p);
  double rho[2], tau[2], work[2];
  for (int i = 0; i < 2; ++i) {
    rho[i] = std::sqrt(2.0 * p.eta * ch.g[i] * p.q_max * p.noise / ch.h[i]);
    const double linear_rate = ch.h[i] * rho[i] / p.noise / std::log(kRateLogBase);
    tau[i] = s.reward / linear_rate;
    work[i] = tau[i] * rho[i] / (p.eta * ch.g[i]);
  }
  const double x1 = ch.g[0] * ch.h[0], x2 = ch.g[1] * ch.h[1];
  s.rho1 = rho[0];
  s.rho2 = rho[1];
  s.tau1 = tau[0];
  s.tau2 = tau[1];
  s.tau_ap = (work[0] + work[1]) / p.q_max;
  s.q1 = x2 * p.q_max / (x1 + x2);
  s.q2 = x1 * p.q_max / (x1 + x2);
  s.interior = true;
  return s;
}

double long_term_slot_reward(const ChannelPmf& pmf, const SystemParams& p) {
  const auto n = static_cast<long>(pmf.size());
  double acc = 0.0;
#pragma omp parallel for reduction(+ : acc)
  for (long c = 0; c < n; ++c) acc += pmf[c].prob * solve_slot(pmf[c], p).reward;
  return acc * p.bandwidth / p.slot;
}

Policy slot_policy(const ChannelPmf& pmf, const SystemParams& p, const GridSpec& g) {
  const StateSpace space(g);
  Policy pol(space, pmf.size());
  for (std::size_t c = 0; c < pmf.size(); ++c) {
    const ChannelOutcome& ch = pmf[c];
    const SlotSolution sol = solve_slot(ch, p);
    const double tau[2] = {sol.tau1, sol.tau2};
    const double energy[2] = {sol.tau1 * sol.rho1, sol.tau2 * sol.rho2};
    const double q[2] = {sol.q1, sol.q2};
    int plan[2], gain[2];
    for (int i = 0; i < 2; ++i) {
      plan[i] = static_cast<int>(std::floor(energy[i] / quantum(p, g, i) * (1.0 + 1e-9)));
      gain[i] = harvest_quanta(harvested_energy(sol.tau_ap, q[i], ch.g[i], p), p, g, i);
    }
    for (std::size_t s = 0; s < space.size(); ++s) {
      const BatteryState b = space.state(s);
      const int have[2] = {b.b1, b.b2};
      Decision d;
      d.action.tau_ap = sol.tau_ap;
      d.action.q1 = sol.q1;
      d.action.q2 = sol.q2;
      double t_out[2] = {0.0, 0.0}, r_out[2] = {0.0, 0.0};
      for (int i = 0; i < 2; ++i) {
        const int e = std::min(have[i], plan[i]);
        d.spent[i] = e;
        d.harvested[i] = gain[i];
        if (e == 0) continue;
        const double en = e * quantum(p, g, i);
        double t = tau[i];
        double r = en / t;
        if (r < p.dev[i].p_min) {
          r = p.dev[i].p_min;
          t = en / r;
        }
        r = std::min(r, p.dev[i].p_max);
        t_out[i] = t;
        r_out[i] = r;
        d.reward[i] = t * rate(r, ch.h[i], p);
      }
      d.action.tau1 = t_out[0];
      d.action.tau2 = t_out[1];
      d.action.rho1 = r_out[0];
      d.action.rho2 = r_out[1];
      pol.at(s, c) = d;
    }
  }
  return pol;
}

}  // namespace wpcn
