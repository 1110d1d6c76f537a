#include "wpcn/channel.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wpcn {

std::string FadingModel::name() const {
  switch (kind) {
    case Kind::kDeterministic:
      return "deterministic";
    case Kind::kRayleigh:
      return "rayleigh";
    case Kind::kNakagami:
      return "nakagami:" + std::to_string(m);
  }
  return "unknown";
}

FadingModel parse_fading(const std::string& text) {
  if (text == "deterministic" || text == "none") return FadingModel::deterministic();
  if (text == "rayleigh") return FadingModel::rayleigh();
  const std::string prefix = "nakagami";
  if (text.rfind(prefix, 0) == 0) {
    double m = 1.0;
    if (text.size() > prefix.size()) {
      if (text[prefix.size()] != ':') throw std::invalid_argument("bad fading spec: " + text);
      m = std::stod(text.substr(prefix.size() + 1));
    }
    if (m < 0.5) throw std::invalid_argument("nakagami m must be >= 0.5");
    return FadingModel::nakagami(m);
  }
  throw std::invalid_argument("unsupported fading model: " + text);
}

std::vector<FadingLevel> discretize_fading(const FadingModel& model, int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
  if (model.kind == FadingModel::Kind::kDeterministic) return {{1.0, 1.0}};

  double shape = 1.0;
  if (model.kind == FadingModel::Kind::kNakagami) {
    if (model.m < 0.5) throw std::invalid_argument("nakagami m must be >= 0.5");
    shape = model.m;
  } else if (model.kind != FadingModel::Kind::kRayleigh) {
    throw std::invalid_argument("unsupported fading model");
  }

  // X ~ Gamma(shape, 1/shape). The partial mean over [a, b] equals
  // P(Y in [a, b]) with Y ~ Gamma(shape + 1, 1/shape), since E[X] = 1.
  using boost::math::gamma_p;
  using boost::math::gamma_p_inv;
  std::vector<double> edges(n_bins + 1);
  edges[0] = 0.0;
  edges[n_bins] = std::numeric_limits<double>::infinity();
  for (int k = 1; k < n_bins; ++k) {
    edges[k] = gamma_p_inv(shape, static_cast<double>(k) / n_bins) / shape;
  }
  auto upper_cdf = [&](double x) {
    if (std::isinf(x)) return 1.0;
    return gamma_p(shape + 1.0, shape * x);
  };
  std::vector<FadingLevel> out;
  out.reserve(n_bins);
  for (int k = 0; k < n_bins; ++k) {
    const double mass = upper_cdf(edges[k + 1]) - upper_cdf(edges[k]);
    out.push_back({mass * n_bins, 1.0 / n_bins});
  }
  return out;
}

double ChannelPmf::total_probability() const {
  double s = 0.0;
  for (const auto& o : outcomes) s += o.prob;
  return s;
}

ChannelPmf build_channel_pmf(const SystemParams& params, const GridSpec& grid,
                             const FadingModel& model, bool reciprocity) {
  const auto levels = discretize_fading(model, grid.n_fading_bins);
  const double hm[2] = {params.dev[0].mean_uplink_gain(), params.dev[1].mean_uplink_gain()};
  const double gm[2] = {params.dev[0].mean_downlink_gain(), params.dev[1].mean_downlink_gain()};

  ChannelPmf pmf;
  if (reciprocity) {
    for (const auto& a : levels) {
      for (const auto& b : levels) {
        ChannelOutcome o;
        o.g = {gm[0] * a.value, gm[1] * b.value};
        o.h = {hm[0] * a.value, hm[1] * b.value};
        o.prob = a.prob * b.prob;
        pmf.outcomes.push_back(o);
      }
    }
  } else {
    for (const auto& g1 : levels)
      for (const auto& g2 : levels)
        for (const auto& h1 : levels)
          for (const auto& h2 : levels) {
            ChannelOutcome o;
            o.g = {gm[0] * g1.value, gm[1] * g2.value};
            o.h = {hm[0] * h1.value, hm[1] * h2.value};
            o.prob = g1.prob * g2.prob * h1.prob * h2.prob;
            pmf.outcomes.push_back(o);
          }
  }
  return pmf;
}

ChannelPmf deterministic_channel(const SystemParams& params) {
  ChannelPmf pmf;
  ChannelOutcome o;
  o.g = {params.dev[0].mean_downlink_gain(), params.dev[1].mean_downlink_gain()};
  o.h = {params.dev[0].mean_uplink_gain(), params.dev[1].mean_uplink_gain()};
  o.prob = 1.0;
  pmf.outcomes.push_back(o);
  return pmf;
}

}  // namespace wpcn
