#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "wpcn/physical_model.hpp"

namespace wpcn {

/// Unit-mean fading of a power gain.
struct FadingModel {
  enum class Kind { kDeterministic, kRayleigh, kNakagami };
  Kind kind = Kind::kRayleigh;
  double m = 1.0;  ///< Nakagami shape, >= 0.5; ignored otherwise

  static FadingModel deterministic() { return {Kind::kDeterministic, 1.0}; }
  static FadingModel rayleigh() { return {Kind::kRayleigh, 1.0}; }
  static FadingModel nakagami(double m) { return {Kind::kNakagami, m}; }

  std::string name() const;
};

/// Parses "deterministic", "rayleigh" or "nakagami:<m>".
FadingModel parse_fading(const std::string& text);

struct FadingLevel {
  double value;
  double prob;
};

/// Splits the fading support into n_bins equal-probability intervals and
/// represents each by its conditional mean, so the first moment stays 1.
/// Rayleigh is an Exp(1) power gain; Nakagami-m is Gamma(m, 1/m).
std::vector<FadingLevel> discretize_fading(const FadingModel& model, int n_bins);

struct ChannelOutcome {
  std::array<double, 2> g{};  ///< downlink gains
  std::array<double, 2> h{};  ///< uplink gains
  double prob = 0.0;
};

/// Joint pmf f(g, h) of the i.i.d. per-slot channel state.
struct ChannelPmf {
  std::vector<ChannelOutcome> outcomes;

  std::size_t size() const { return outcomes.size(); }
  const ChannelOutcome& operator[](std::size_t k) const { return outcomes[k]; }
  double total_probability() const;
};

/// With reciprocity each device draws one fading value shared by both of
/// its links (n^2 joint outcomes); otherwise all four links fade
/// independently (n^4 outcomes). Path loss is applied per device.
ChannelPmf build_channel_pmf(const SystemParams& params, const GridSpec& grid,
                             const FadingModel& model, bool reciprocity = true);

/// Single outcome at the mean gains.
ChannelPmf deterministic_channel(const SystemParams& params);

}  // namespace wpcn
