#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "wpcn/channel.hpp"
#include "wpcn/physical_model.hpp"

namespace wpcn::testing {

// Seeded draws for hand-rolled property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) {
    std::seed_seq seq{seed, std::uint64_t{0x5eed}};
    eng_.seed(seq);
  }

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng_); }
  bool coin() { return integer(0, 1) == 1; }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline SystemParams reference_params(double d1 = 1.0, double d2 = 3.0) {
  SystemParams p;
  p.dev[0].distance = d1;
  p.dev[1].distance = d2;
  return p;
}

inline GridSpec small_grid(int b1, int b2, int bins = 2, int n_tau = 6, int n_q = 4) {
  GridSpec g;
  g.b_max = {b1, b2};
  g.n_fading_bins = bins;
  g.n_tauap_grid = n_tau;
  g.n_q1_grid = n_q;
  return g;
}

// Random but valid parameters around the reference point.
inline SystemParams random_params(Gen& gen) {
  SystemParams p;
  p.q_max = gen.uniform(0.5, 5.0);
  p.eta = gen.uniform(0.3, 1.0);
  for (auto& d : p.dev) {
    d.distance = gen.uniform(0.7, 5.0);
    d.p_min = gen.log_uniform(1e-5, 2e-3);
    d.p_max = d.p_min * gen.uniform(1.5, 20.0);
    d.b_max = gen.log_uniform(2e-5, 5e-4);
  }
  return p;
}

inline ChannelOutcome random_outcome(Gen& gen, const SystemParams& p) {
  ChannelOutcome ch;
  for (int i = 0; i < 2; ++i) {
    const double f = gen.log_uniform(0.05, 4.0);
    ch.h[i] = p.dev[i].mean_uplink_gain() * f;
    ch.g[i] = p.dev[i].mean_downlink_gain() * (gen.coin() ? f : gen.log_uniform(0.05, 4.0));
  }
  ch.prob = 1.0;
  return ch;
}

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

}  // namespace wpcn::testing
