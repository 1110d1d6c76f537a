#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "support.hpp"
#include "wpcn/channel.hpp"

using namespace wpcn;
using wpcn::testing::simpson;

namespace {

// Gamma(m, 1/m) density, unit mean.
double gamma_pdf(double x, double m) {
  if (x <= 0.0) return 0.0;
  return std::exp(m * std::log(m) + (m - 1.0) * std::log(x) - m * x - std::lgamma(m));
}

// Quantile by bisection on the numerically integrated CDF.
double gamma_quantile(double q, double m) {
  double lo = 0.0, hi = 20.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = simpson([m](double x) { return gamma_pdf(x, m); }, 0.0, mid, 4000);
    (cdf < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double second_moment(const std::vector<FadingLevel>& lv) {
  double s = 0.0;
  for (const auto& l : lv) s += l.value * l.value * l.prob;
  return s;
}

}  // namespace

TEST_CASE("deterministic fading is a single unit level") {
  for (int n : {1, 3, 8}) {
    const auto lv = discretize_fading(FadingModel::deterministic(), n);
    REQUIRE(lv.size() == 1);
    CHECK(lv[0].value == 1.0);
    CHECK(lv[0].prob == 1.0);
  }
}

TEST_CASE("exponential two-bin conditional means") {
  const auto lv = discretize_fading(FadingModel::rayleigh(), 2);
  REQUIRE(lv.size() == 2);
  const double med = std::log(2.0);
  auto xe = [](double x) { return x * std::exp(-x); };
  const double lower = simpson(xe, 0.0, med) / 0.5;
  const double upper = simpson(xe, med, 60.0) / 0.5;
  CHECK(lv[0].value == doctest::Approx(lower).epsilon(1e-9));
  CHECK(lv[1].value == doctest::Approx(upper).epsilon(1e-9));
  // Memorylessness gives the closed forms 1 - ln 2 and 1 + ln 2.
  CHECK(lv[0].value == doctest::Approx(1.0 - med).epsilon(1e-12));
  CHECK(lv[1].value == doctest::Approx(1.0 + med).epsilon(1e-12));
  CHECK(lv[0].prob == 0.5);
  CHECK(lv[1].prob == 0.5);
}

TEST_CASE("nakagami bins match a numerical oracle") {
  const double m = 5.0;
  const int n = 3;
  const auto lv = discretize_fading(FadingModel::nakagami(m), n);
  REQUIRE(lv.size() == 3);
  const double e1 = gamma_quantile(1.0 / 3.0, m), e2 = gamma_quantile(2.0 / 3.0, m);
  auto xf = [m](double x) { return x * gamma_pdf(x, m); };
  const double edges[4] = {0.0, e1, e2, 12.0};
  for (int k = 0; k < n; ++k) {
    const double mean = simpson(xf, edges[k], edges[k + 1]) * n;
    CHECK(lv[k].value == doctest::Approx(mean).epsilon(1e-6));
  }
}

TEST_CASE("unit mean for every model and bin count") {
  for (const auto& model : {FadingModel::rayleigh(), FadingModel::nakagami(0.5),
                            FadingModel::nakagami(2.5), FadingModel::nakagami(5.0)}) {
    for (int n = 1; n <= 40; ++n) {
      const auto lv = discretize_fading(model, n);
      double mean = 0.0, mass = 0.0;
      for (const auto& l : lv) {
        mean += l.value * l.prob;
        mass += l.prob;
      }
      CHECK(mean == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("second moment grows toward the continuous value") {
  double prev = 0.0;
  for (int n : {1, 2, 4, 8, 16, 32, 64, 128, 256, 512}) {
    const double s = second_moment(discretize_fading(FadingModel::rayleigh(), n));
    CHECK(s >= prev - 1e-12);
    CHECK(s < 2.0);
    prev = s;
  }
  CHECK(prev > 1.97);
  // Gamma(5, 1/5) has second moment 1 + 1/5.
  CHECK(second_moment(discretize_fading(FadingModel::nakagami(5.0), 512)) ==
        doctest::Approx(1.2).epsilon(5e-3));
}

TEST_CASE("fading parsing") {
  CHECK(parse_fading("rayleigh").kind == FadingModel::Kind::kRayleigh);
  CHECK(parse_fading("nakagami:5").m == 5.0);
  CHECK(parse_fading("deterministic").kind == FadingModel::Kind::kDeterministic);
  CHECK_THROWS_AS(parse_fading("rician"), std::invalid_argument);
  CHECK_THROWS_AS(parse_fading("nakagami:0.2"), std::invalid_argument);
}

TEST_CASE("path loss on a deterministic channel") {
  SystemParams p;
  p.dev[0].distance = 1.0;
  p.dev[1].distance = 3.0;
  GridSpec g;
  g.n_fading_bins = 1;
  const auto pmf = build_channel_pmf(p, g, FadingModel::deterministic());
  REQUIRE(pmf.size() == 1);
  CHECK(pmf[0].h[0] == doctest::Approx(1.25e-3));
  CHECK(pmf[0].g[0] == doctest::Approx(1.25e-3));
  CHECK(pmf[0].h[1] == doctest::Approx(1.25e-3 / 9.0));
  CHECK(pmf[0].prob == 1.0);
  const auto det = deterministic_channel(p);
  CHECK(det[0].h[1] == pmf[0].h[1]);
}

TEST_CASE("joint pmf structure") {
  SystemParams p;
  p.dev[1].distance = 2.0;
  for (int n = 1; n <= 4; ++n) {
    GridSpec g;
    g.n_fading_bins = n;
    const auto rec = build_channel_pmf(p, g, FadingModel::rayleigh(), true);
    const auto ind = build_channel_pmf(p, g, FadingModel::rayleigh(), false);
    CHECK(rec.size() == static_cast<std::size_t>(n * n));
    CHECK(ind.size() == static_cast<std::size_t>(n * n * n * n));
    CHECK(rec.total_probability() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ind.total_probability() == doctest::Approx(1.0).epsilon(1e-12));
    std::array<double, 2> mean_h{0, 0}, mean_g{0, 0};
    for (const auto& o : rec.outcomes) {
      for (int i = 0; i < 2; ++i) {
        CHECK(o.g[i] / p.dev[i].g0 == doctest::Approx(o.h[i] / p.dev[i].h0));
        CHECK(o.h[i] >= 0.0);
        mean_h[i] += o.prob * o.h[i];
        mean_g[i] += o.prob * o.g[i];
      }
    }
    for (int i = 0; i < 2; ++i) {
      CHECK(mean_h[i] == doctest::Approx(p.dev[i].mean_uplink_gain()).epsilon(1e-9));
      CHECK(mean_g[i] == doctest::Approx(p.dev[i].mean_downlink_gain()).epsilon(1e-9));
    }
    std::set<double> distinct_g1;
    for (const auto& o : ind.outcomes) distinct_g1.insert(o.g[0]);
    CHECK(distinct_g1.size() == static_cast<std::size_t>(n));
  }
}
