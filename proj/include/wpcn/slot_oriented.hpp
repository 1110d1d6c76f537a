#pragma once

#include <array>
#include <ostream>
#include <string>

#include "wpcn/channel.hpp"
#include "wpcn/physical_model.hpp"
#include "wpcn/value_function.hpp"

namespace wpcn {

/// Single-slot max-min allocation where each device spends, within the
/// slot, the energy it harvests in that slot.
struct SlotSolution {
  double tau1 = 0.0, tau2 = 0.0, tau_ap = 0.0;
  double rho1 = 0.0, rho2 = 0.0;
  double q1 = 0.0, q2 = 0.0;
  double reward = 0.0;  ///< common per-slot reward tau_i R_i
  bool interior = false;       ///< rho equals the stationary pair rho^0
  bool degenerate = false;     ///< some gain is zero; reward is 0
  bool energy_wasted = false;  ///< time slack spent harvesting past battery capacity

  static std::string csv_header();
  void write_csv_row(std::ostream& os) const;
};

/// Stationary point of the per-device time cost a_i(rho); the root of
///   eta g Q + rho = (sigma0^2 / h + rho) ln(1 + h rho / sigma0^2).
double stationary_power(double g, double h, const SystemParams& p);

/// Residual of the equation above, relative to its left side.
double stationary_residual(double rho, double g, double h, const SystemParams& p);

/// Time per unit of reward a_i(rho) = (eta g Q + rho) / (eta g Q R(rho, h)).
double time_cost(double rho, double g, double h, const SystemParams& p);

/// Exact solution: bisection on the common reward t, each device using the
/// power in [P_min, min(P_max, battery-limited power)] closest to rho^0.
SlotSolution solve_slot(const ChannelOutcome& ch, const SystemParams& p);

/// Largest violation of the slot invariants, relative: time and beam sums,
/// equal rewards, energy balance E_i = min(C_i, B_max_i), battery and power
/// bounds. Degenerate solutions only check the sums.
double slot_invariant_violation(const SlotSolution& s, const ChannelOutcome& ch,
                                const SystemParams& p);

/// Low-SNR closed form: rho_i = sqrt(2 eta g_i Q sigma0^2 / h_i),
/// Q_i = g_{-i} h_{-i} Q / (g1 h1 + g2 h2); durations from the linearized
/// rate, reward in the configured log base.
SlotSolution solve_slot_low_snr(const ChannelOutcome& ch, const SystemParams& p);

/// Closed-form per-slot reward of the low-SNR solution.
double low_snr_slot_reward(const ChannelOutcome& ch, const SystemParams& p);

/// sum_c f(c) reward_c, in bits/s.
double long_term_slot_reward(const ChannelPmf& pmf, const SystemParams& p);

/// Embeds the slot-oriented allocation into the battery model: each state
/// spends min(b_i, planned quanta) and keeps the slot's downlink phase.
Policy slot_policy(const ChannelPmf& pmf, const SystemParams& p, const GridSpec& g);

}  // namespace wpcn
