#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "support.hpp"
#include "wpcn/action_optimizer.hpp"

using namespace wpcn;
using namespace wpcn::testing;

namespace {

SystemParams wide_bounds() {
  SystemParams p;
  for (auto& d : p.dev) {
    d.p_min = 1e-9;
    d.p_max = 1e3;
  }
  return p;
}

// Weighted uplink reward written out from the rate definition.
double uplink_objective(double tau1, double tau2, double e1, double e2, double h1, double h2,
                        double alpha, const SystemParams& p) {
  auto part = [&](double tau, double e, double h) {
    return tau > 0.0 ? tau * std::log2(1.0 + h * e / (tau * p.noise)) : 0.0;
  };
  return alpha * part(tau1, e1, h1) + (1.0 - alpha) * part(tau2, e2, h2);
}

struct Window {
  double lo, hi;
};

Window power_window(double e1, double e2, double tau_ap, const SystemParams& p) {
  const double w = p.slot - tau_ap;
  return {std::max(e1 / p.dev[0].p_max, w - e2 / p.dev[1].p_min),
          std::min(e1 / p.dev[0].p_min, w - e2 / p.dev[1].p_max)};
}

ValueFunction random_monotone_K(Gen& gen, StateSpace space, double scale) {
  ValueFunction K(space);
  const auto& bm = space.b_max();
  for (int b1 = 0; b1 <= bm[0]; ++b1)
    for (int b2 = 0; b2 <= bm[1]; ++b2) {
      double v = gen.uniform(0.0, scale);
      if (b1 > 0) v += K.at({b1 - 1, b2});
      if (b2 > 0) v = std::max(v, K.at({b1, b2 - 1}) + gen.uniform(0.0, scale));
      K.at({b1, b2}) = v;
    }
  return K;
}

ValueFunction random_K(Gen& gen, StateSpace space, double scale) {
  ValueFunction K(space);
  for (std::size_t i = 0; i < K.size(); ++i) K[i] = gen.uniform(-scale, scale);
  return K;
}

}  // namespace

TEST_CASE("symmetric split halves the window") {
  const SystemParams p = wide_bounds();
  for (double tau_ap : {0.0, 0.1, 0.37}) {
    const auto s = solve_tau1(2e-5, 2e-5, tau_ap, 3e-4, 3e-4, 0.5, p);
    REQUIRE(s.has_value());
    CHECK(s->tau1 == doctest::Approx((p.slot - tau_ap) / 2).epsilon(1e-9));
    CHECK(s->tau1 + s->tau2 == doctest::Approx(p.slot - tau_ap).epsilon(1e-14));
  }
}

TEST_CASE("all weight on device 1 pushes tau1 to the window top") {
  Gen gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    const SystemParams p = random_params(gen);
    const ChannelOutcome ch = random_outcome(gen, p);
    const double e1 = gen.uniform(0.1, 1.0) * p.dev[0].b_max;
    const double e2 = gen.uniform(0.1, 1.0) * p.dev[1].b_max;
    const double tau_ap = gen.uniform(0.0, 0.9) * p.slot;
    const Window w = power_window(e1, e2, tau_ap, p);
    const auto s = solve_tau1(e1, e2, tau_ap, ch.h[0], ch.h[1], 1.0, p);
    if (w.lo > w.hi) {
      CHECK_FALSE(s.has_value());
      continue;
    }
    REQUIRE(s.has_value());
    CHECK(s->tau1 == doctest::Approx(w.hi).epsilon(1e-12));
    // Dense grid agrees.
    double best_tau = w.lo, best = -1.0;
    for (int k = 0; k <= 10000; ++k) {
      const double t = w.lo + (w.hi - w.lo) * k / 10000.0;
      const double v = uplink_objective(t, p.slot - tau_ap - t, e1, e2, ch.h[0], ch.h[1], 1.0, p);
      if (v > best) best = v, best_tau = t;
    }
    CHECK(best_tau == doctest::Approx(w.hi).epsilon(1e-9));
  }
}

TEST_CASE("solve_tau1 beats a dense grid on the power window") {
  Gen gen(22);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 150; ++trial) {
    const SystemParams p = random_params(gen);
    const ChannelOutcome ch = random_outcome(gen, p);
    const double e1 = gen.uniform(0.05, 1.0) * p.dev[0].b_max;
    const double e2 = gen.uniform(0.05, 1.0) * p.dev[1].b_max;
    const double tau_ap = gen.uniform(0.0, 0.99) * p.slot;
    const double alpha = gen.uniform(0.0, 1.0);
    const Window w = power_window(e1, e2, tau_ap, p);
    const auto s = solve_tau1(e1, e2, tau_ap, ch.h[0], ch.h[1], alpha, p);
    CHECK(s.has_value() == (w.lo <= w.hi + 1e-12 * p.slot));
    if (!s) continue;
    ++checked;
    const double got =
        uplink_objective(s->tau1, s->tau2, e1, e2, ch.h[0], ch.h[1], alpha, p);
    CHECK(s->objective == doctest::Approx(got).epsilon(1e-9));
    double grid_best = 0.0;
    for (int k = 0; k <= 10000; ++k) {
      const double t = w.lo + (w.hi - w.lo) * k / 10000.0;
      grid_best = std::max(grid_best, uplink_objective(t, p.slot - tau_ap - t, e1, e2, ch.h[0],
                                                       ch.h[1], alpha, p));
    }
    CHECK(got >= grid_best * (1.0 - 1e-12));
    CHECK(s->tau1 >= w.lo * (1 - 1e-12));
    CHECK(s->tau1 <= w.hi * (1 + 1e-12));
  }
  CHECK(checked >= 100);
}

TEST_CASE("derivative changes sign once and the root zeroes it") {
  Gen gen(23);
  for (int trial = 0; trial < 200; ++trial) {
    const SystemParams p = random_params(gen);
    const ChannelOutcome ch = random_outcome(gen, p);
    const double e1 = gen.uniform(0.01, 1.0) * p.dev[0].b_max;
    const double e2 = gen.uniform(0.01, 1.0) * p.dev[1].b_max;
    const double tau_ap = gen.uniform(0.0, 0.95) * p.slot;
    const double alpha = gen.uniform(0.01, 0.99);
    const double w = p.slot - tau_ap;
    int changes = 0;
    double prev = tau1_derivative(w * 0.5e-3, e1, e2, tau_ap, ch.h[0], ch.h[1], alpha, p);
    for (int k = 1; k < 1000; ++k) {
      const double t = w * (k + 0.5) / 1000.0;
      const double d = tau1_derivative(t, e1, e2, tau_ap, ch.h[0], ch.h[1], alpha, p);
      if ((d > 0) != (prev > 0)) ++changes;
      prev = d;
    }
    CHECK(changes <= 1);
    const auto root = tau1_unconstrained_root(e1, e2, tau_ap, ch.h[0], ch.h[1], alpha, p);
    INFO("e1=" << e1 << " e2=" << e2 << " tau_ap=" << tau_ap << " alpha=" << alpha);
    if (!root) {
      // Only when the crossing is closer to an end than a double resolves.
      const double near_end = tau1_derivative(w * (1 - 1e-15), e1, e2, tau_ap, ch.h[0], ch.h[1], alpha, p);
      const double near_start = tau1_derivative(w * 1e-300, e1, e2, tau_ap, ch.h[0], ch.h[1], alpha, p);
      CHECK((near_end > 0 || near_start < 0));
      continue;
    }
    CHECK(*root > 0.0);
    CHECK(*root <= w);  // may round onto the end
    const double c1 = ch.h[0] * e1 / p.noise;
    const double c2 = ch.h[1] * e2 / p.noise;
    // The root is well conditioned when neither duration is vanishingly short.
    if (std::min(*root, w - *root) > 1e-6 * w) {
      const double m1 = std::log1p(c1 / *root) - c1 / (*root + c1);
      const double m2 = std::log1p(c2 / (w - *root)) - c2 / (w - *root + c2);
      CHECK(std::abs(alpha * m1 - (1 - alpha) * m2) <= 1e-9 * alpha * m1);
    }
    // Interior solutions of the constrained problem sit on the same root.
    const auto s = solve_tau1(e1, e2, tau_ap, ch.h[0], ch.h[1], alpha, p);
    if (s && s->interior) {
      CHECK(s->tau1 == doctest::Approx(*root).epsilon(1e-9));
      const double d = tau1_derivative(s->tau1, e1, e2, tau_ap, ch.h[0], ch.h[1], alpha, p);
      CHECK(std::abs(d) <= 1e-9 * alpha * (std::log1p(c1 / s->tau1) - c1 / (s->tau1 + c1)));
    }
  }
}

TEST_CASE("single transmitter takes the longest duration the power box allows") {
  SystemParams p;
  const double e = 5e-5;
  const auto s = split_transmission(e, 0.0, 0.2, 1e-3, 1e-3, 0.5, p);
  REQUIRE(s.feasible);
  CHECK(s.tau1 == doctest::Approx(e / p.dev[0].p_min));
  CHECK(s.tau2 == 0.0);
  const auto tight = split_transmission(e, 0.0, p.slot - 0.01, 1e-3, 1e-3, 0.5, p);
  REQUIRE(tight.feasible);
  CHECK(tight.tau1 == doctest::Approx(0.01));
  CHECK(tight.rho1 == doctest::Approx(5e-3));
  CHECK_FALSE(split_transmission(e, 0.0, p.slot - 1e-3, 1e-3, 1e-3, 0.5, p).feasible);
  CHECK(split_transmission(0.0, 0.0, p.slot, 1e-3, 1e-3, 0.5, p).feasible);
}

TEST_CASE("empty battery only chooses the beam split") {
  const SystemParams p = reference_params();
  const GridSpec g = small_grid(4, 4, 1, 5, 5);
  const ChannelOutcome ch = deterministic_channel(p)[0];
  Gen gen(24);
  const ValueFunction K = random_K(gen, StateSpace(g), 3.0);
  const auto r = optimize_state({0, 0}, ch, 0.5, K, p, g);
  CHECK(r.decision.spent == std::array<int, 2>{0, 0});
  CHECK(r.decision.action.tau_ap == doctest::Approx(p.slot));
  double best = -1e300;
  for (int j = 0; j < g.n_q1_grid; ++j) {
    const double q1 = grid_point(p.q_max, j, g.n_q1_grid);
    const int c1 = harvest_quanta(harvested_energy(p.slot, q1, ch.g[0], p), p, g, 0);
    const int c2 = harvest_quanta(harvested_energy(p.slot, p.q_max - q1, ch.g[1], p), p, g, 1);
    best = std::max(best, K.at({std::min(c1, 4), std::min(c2, 4)}));
  }
  CHECK(r.value == doctest::Approx(best));
}

TEST_CASE("myopic optimum matches a seven-variable brute force") {
  Gen gen(25);
  for (int trial = 0; trial < 6; ++trial) {
    SystemParams p = reference_params(gen.uniform(0.8, 3.0), gen.uniform(0.8, 4.0));
    if (trial % 2) {
      for (auto& d : p.dev) {
        d.p_min = 1e-5;
        d.p_max = 5e-4;
      }
    }
    const GridSpec g = small_grid(3, 3, 1, 6, 3);
    ChannelOutcome ch = deterministic_channel(p)[0];
    const double alpha = gen.uniform(0.1, 0.9);
    const ValueFunction zero{StateSpace(g)};
    const BatteryState b{gen.integer(1, 3), gen.integer(1, 3)};
    const auto got = optimize_state(b, ch, alpha, zero, p, g);

    const double unit[2] = {quantum(p, g, 0), quantum(p, g, 1)};
    const int n_dense = 500;
    double oracle = 0.0;
    for (int k = 0; k < g.n_tauap_grid; ++k) {
      const double w = p.slot - grid_point(p.slot, k, g.n_tauap_grid);
      for (int e1 = 0; e1 <= b.b1; ++e1)
        for (int e2 = 0; e2 <= b.b2; ++e2) {
          const double en[2] = {e1 * unit[0], e2 * unit[1]};
          double best = -1.0;
          // tau1, tau2 dense with tau1 + tau2 <= w; rho = E / tau in the box.
          for (int a = 0; a <= n_dense; ++a) {
            const double t1 = w * a / n_dense;
            if (en[0] > 0 && (t1 <= 0 || en[0] / t1 < p.dev[0].p_min || en[0] / t1 > p.dev[0].p_max))
              continue;
            const double rest = w - t1;
            for (int c = 0; c <= n_dense; ++c) {
              const double t2 = rest * c / n_dense;
              if (en[1] > 0 &&
                  (t2 <= 0 || en[1] / t2 < p.dev[1].p_min || en[1] / t2 > p.dev[1].p_max))
                continue;
              best = std::max(best, uplink_objective(en[0] > 0 ? t1 : 0.0, en[1] > 0 ? t2 : 0.0,
                                                     en[0], en[1], ch.h[0], ch.h[1], alpha, p));
            }
          }
          // Beam split (Q1, Q2 <= Q_max - Q1) does not enter a myopic reward.
          for (int j1 = 0; j1 < g.n_q1_grid; ++j1)
            for (int j2 = 0; j2 < g.n_q1_grid - j1; ++j2) oracle = std::max(oracle, best);
        }
    }
    INFO("trial " << trial);
    CHECK(got.value >= oracle * (1.0 - 1e-12));
    CHECK(got.value <= oracle * 1.01);
  }
}

TEST_CASE("reconstructed actions are feasible") {
  Gen gen(26);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemParams p = random_params(gen);
    const GridSpec g = small_grid(gen.integer(1, 5), gen.integer(1, 5), 1, gen.integer(2, 9),
                                  gen.integer(2, 6));
    const ChannelOutcome ch = random_outcome(gen, p);
    const ValueFunction K = random_K(gen, StateSpace(g), 2.0);
    const double alpha = gen.uniform(0, 1);
    const ActionTable table(p, g, ch, alpha);
    ContinuationTable cont;
    cont.build(table, K);
    for (std::size_t s = 0; s < K.size(); ++s) {
      const BatteryState b = K.space().state(s);
      const auto r = search_state(table, cont, K, b);
      const std::array<double, 2> stored{b.b1 * quantum(p, g, 0), b.b2 * quantum(p, g, 1)};
      CHECK(action_feasible(r.decision.action, p, stored));
      const Action& a = r.decision.action;
      CHECK(a.tau1 * a.rho1 == doctest::Approx(r.decision.spent[0] * quantum(p, g, 0)).epsilon(1e-9));
      CHECK(a.tau2 * a.rho2 == doctest::Approx(r.decision.spent[1] * quantum(p, g, 1)).epsilon(1e-9));
      const double recomputed = alpha * r.decision.reward[0] + (1 - alpha) * r.decision.reward[1] +
                                K.at(r.decision.next(b, g.b_max));
      CHECK(r.value == doctest::Approx(recomputed).epsilon(1e-12));
    }
  }
}

TEST_CASE("value is monotone in the battery when K is") {
  Gen gen(27);
  for (int trial = 0; trial < 10; ++trial) {
    const SystemParams p = random_params(gen);
    const GridSpec g = small_grid(4, 4, 1, 7, 4);
    const ChannelOutcome ch = random_outcome(gen, p);
    const ValueFunction K = random_monotone_K(gen, StateSpace(g), 1.0);
    const double alpha = gen.uniform(0, 1);
    const ActionTable table(p, g, ch, alpha);
    ContinuationTable cont;
    cont.build(table, K);
    for (int b1 = 0; b1 <= 4; ++b1)
      for (int b2 = 0; b2 <= 4; ++b2) {
        const double v = search_state(table, cont, K, {b1, b2}).value;
        if (b1 < 4) CHECK(search_state(table, cont, K, {b1 + 1, b2}).value >= v - 1e-12);
        if (b2 < 4) CHECK(search_state(table, cont, K, {b1, b2 + 1}).value >= v - 1e-12);
      }
  }
}

TEST_CASE("adding a constant to K shifts the value only") {
  Gen gen(28);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemParams p = random_params(gen);
    const GridSpec g = small_grid(3, 4, 1, 6, 4);
    const ChannelOutcome ch = random_outcome(gen, p);
    ValueFunction K = random_K(gen, StateSpace(g), 1.0);
    const double alpha = gen.uniform(0, 1);
    const BatteryState b{gen.integer(0, 3), gen.integer(0, 4)};
    const auto base = optimize_state(b, ch, alpha, K, p, g);
    // Powers of two keep the shifted comparisons exact.
    const double c = gen.coin() ? 8.0 : -4.0;
    K.shift(c);
    const auto moved = optimize_state(b, ch, alpha, K, p, g);
    CHECK(moved.value == doctest::Approx(base.value + c).epsilon(1e-12));
    CHECK(moved.decision.spent == base.decision.spent);
    CHECK(moved.decision.action.tau_ap == base.decision.action.tau_ap);
    CHECK(moved.decision.action.q1 == base.decision.action.q1);
  }
}

TEST_CASE("energy-tight candidates never hurt") {
  Gen gen(29);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemParams p = random_params(gen);
    const GridSpec g = small_grid(3, 3, 1, 5, 4);
    const ChannelOutcome ch = random_outcome(gen, p);
    const ValueFunction K = random_K(gen, StateSpace(g), 1.0);
    const BatteryState b{gen.integer(0, 3), gen.integer(0, 3)};
    OptimizerOptions off;
    off.energy_tight_candidates = false;
    const double alpha = gen.uniform(0, 1);
    CHECK(optimize_state(b, ch, alpha, K, p, g).value >=
          optimize_state(b, ch, alpha, K, p, g, off).value - 1e-12);
  }
}

TEST_CASE("prune bounds examples") {
  const BatteryState b{4, 3};
  const EnergyRect none = prune_bounds({0, 3}, b);
  const EnergyRect full = full_rect(b);
  CHECK(none.e1_lo == full.e1_lo);
  CHECK(none.e1_hi == full.e1_hi);
  CHECK(none.e2_lo == full.e2_lo);
  CHECK(none.e2_hi == full.e2_hi);
  const EnergyRect point = prune_bounds({4, 0}, b);
  CHECK(point.e1_lo == 4);
  CHECK(point.e1_hi == 4);
  CHECK(point.e2_lo == 0);
  CHECK(point.e2_hi == 0);
}

TEST_CASE("pruned energy search equals the unpruned one") {
  Gen gen(30);
  int mismatches = 0, total = 0;
  std::string detail;
  for (int trial = 0; trial < 60; ++trial) {
    const SystemParams p = random_params(gen);
    const GridSpec g = small_grid(gen.integer(1, 5), gen.integer(1, 5), 1, 6, 4);
    const ValueFunction K = random_monotone_K(gen, StateSpace(g), 0.5);
    const double alpha = gen.uniform(0, 1);
    // Shared g; h1 rising and h2 falling along the chain.
    ChannelOutcome base = random_outcome(gen, p);
    std::vector<ActionTable> tables;
    const int len = 4;
    double f1 = 0.2, f2 = 3.0;
    for (int c = 0; c < len; ++c) {
      ChannelOutcome ch = base;
      ch.h[0] = p.dev[0].mean_uplink_gain() * f1;
      ch.h[1] = p.dev[1].mean_uplink_gain() * f2;
      tables.emplace_back(p, g, ch, alpha);
      f1 *= gen.uniform(1.0, 3.0);
      f2 /= gen.uniform(1.0, 3.0);
    }
    std::vector<const ActionTable*> chain;
    for (const auto& t : tables) chain.push_back(&t);
    const BatteryState b{gen.integer(0, g.b_max[0]), gen.integer(0, g.b_max[1])};
    const int k = gen.integer(0, g.n_tauap_grid - 1), j = gen.integer(0, g.n_q1_grid - 1);
    const auto plain = energy_splits_along_chain(chain, K, b, k, j, false);
    const auto pruned = energy_splits_along_chain(chain, K, b, k, j, true);
    for (int c = 0; c < len; ++c) {
      ++total;
      if (plain[c].feasible != pruned[c].feasible ||
          std::abs(plain[c].value - pruned[c].value) > 1e-12 * std::max(1.0, std::abs(plain[c].value))) {
        ++mismatches;
        detail += "\n  trial " + std::to_string(trial) + " link " + std::to_string(c) + ": e*=(" +
                  std::to_string(plain[c].e1) + "," + std::to_string(plain[c].e2) + ") prev=(" +
                  std::to_string(plain[c - 1].e1) + "," + std::to_string(plain[c - 1].e2) +
                  ") value " + std::to_string(plain[c].value) + " vs " +
                  std::to_string(pruned[c].value);
      }
    }
  }
  INFO(mismatches << " of " << total << " pruned searches lost the optimum" << detail);
  CHECK(mismatches == 0);
}

TEST_CASE("low-SNR fast path") {
  Gen gen(31);
  for (int trial = 0; trial < 30; ++trial) {
    SystemParams p = reference_params();
    const GridSpec g = small_grid(4, 4, 1, 9, 5);
    ChannelOutcome ch = deterministic_channel(p)[0];
    // SNR at P_max below 0.01 on both links.
    for (int i = 0; i < 2; ++i) ch.h[i] = gen.uniform(0.05, 1.0) * 0.01 * p.noise / p.dev[i].p_max;
    const ValueFunction K = random_monotone_K(gen, StateSpace(g), 1e-3);
    const double alpha = gen.uniform(0, 1);
    const BatteryState b{gen.integer(0, 4), gen.integer(0, 4)};
    bool used = false;
    const auto fast = low_snr_fast_path(b, ch, alpha, K, p, g, 0.01, &used);
    CHECK(used);
    const Action& a = fast.decision.action;
    CHECK(a.tau1 + a.tau2 + a.tau_ap == doctest::Approx(p.slot).epsilon(1e-15));
    const auto full = optimize_state(b, ch, alpha, K, p, g);
    CHECK(fast.value <= full.value + 1e-15 * std::max(1.0, std::abs(full.value)));
    CHECK(close_rel(fast.value, full.value, 0.01));
    if (b.b1 == 0 && b.b2 == 0) CHECK(a.tau_ap == p.slot);
  }
  // Above the threshold the full optimizer answers.
  SystemParams p = reference_params();
  const GridSpec g = small_grid(2, 2, 1, 5, 3);
  bool used = true;
  low_snr_fast_path({1, 1}, deterministic_channel(p)[0], 0.5, ValueFunction(StateSpace(g)), p, g,
                    0.01, &used);
  CHECK_FALSE(used);
}
