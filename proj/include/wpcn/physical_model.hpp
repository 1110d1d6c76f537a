#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace wpcn {

/// Base of the logarithm in the Shannon rate. With base 2 rates are in
/// bits/s/Hz; set to e to reproduce natural-log (nats) accounting.
inline constexpr double kRateLogBase = 2.0;

/// Per-device physical constants. Gains are power gains; distances in meters.
struct DeviceParams {
  double distance = 1.0;
  double h0 = 1.25e-3;  ///< uplink gain at 1 m
  double g0 = 1.25e-3;  ///< downlink gain at 1 m
  double gamma = 2.0;   ///< uplink path-loss exponent
  double delta = 2.0;   ///< downlink path-loss exponent
  double p_min = 1e-3;  ///< W
  double p_max = 10e-3; ///< W
  double b_max = 0.1e-3; ///< battery capacity, J

  /// Mean uplink gain after path loss.
  double mean_uplink_gain() const { return h0 * std::pow(distance, -gamma); }
  /// Mean downlink gain after path loss.
  double mean_downlink_gain() const { return g0 * std::pow(distance, -delta); }
};

/// Noise power in watts from a spectral density in dBm/Hz over a bandwidth.
inline double noise_power_watts(double dbm_per_hz, double bandwidth_hz) {
  const double dbm = dbm_per_hz + 10.0 * std::log10(bandwidth_hz);
  return std::pow(10.0, dbm / 10.0) * 1e-3;
}

struct SystemParams {
  double slot = 0.5;       ///< T, seconds
  double q_max = 3.0;      ///< W
  double eta = 0.8;
  double bandwidth = 1e6;  ///< Hz, only used to convert to bits/s
  double noise = noise_power_watts(-155.0, 1e6);  ///< sigma0^2, W
  std::array<DeviceParams, 2> dev{};

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

enum class Rounding { kFloor, kCeil };

/// Discretization of batteries, fading and the action grids.
struct GridSpec {
  std::array<int, 2> b_max{10, 10};  ///< quanta per device
  int n_fading_bins = 3;
  int n_tauap_grid = 21;
  int n_q1_grid = 21;
  Rounding rounding = Rounding::kFloor;

  void validate() const;
  std::size_t num_battery_states() const {
    return static_cast<std::size_t>(b_max[0] + 1) * static_cast<std::size_t>(b_max[1] + 1);
  }
};

/// Joules per energy quantum of device i.
inline double quantum(const SystemParams& p, const GridSpec& g, int i) {
  return p.dev[i].b_max / g.b_max[i];
}

/// Shannon rate log(1 + h rho / sigma0^2) in the base kRateLogBase.
inline double rate(double rho, double h, const SystemParams& p) {
  return std::log1p(h * rho / p.noise) / std::log(kRateLogBase);
}

/// Energy stored during the downlink phase, tau_ap * eta * Q * g.
inline double harvested_energy(double tau_ap, double q, double g, const SystemParams& p) {
  return tau_ap * p.eta * q * g;
}

/// Energy harvested by device i expressed in whole quanta (floor or ceiling).
int harvest_quanta(double joules, const SystemParams& p, const GridSpec& g, int i);

/// Battery update in quanta: min(b_max, b - e + quantized(C)). Throws
/// std::invalid_argument when e > b or the inputs leave the battery range.
int battery_step(int b, int e, double harvested_joules, const SystemParams& p,
                 const GridSpec& g, int i);

/// Same update when the harvest is already quantized.
inline int battery_step_quanta(int b, int e, int c, int b_max) {
  const int next = b - e + c;
  return next < b_max ? next : b_max;
}

}  // namespace wpcn
