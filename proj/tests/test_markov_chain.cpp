#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"
#include "wpcn/markov_chain.hpp"

using namespace wpcn;

namespace {

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("duplicate transitions merge") {
  SparseChain c(2);
  c.add(0, 1, 0.25);
  c.add(0, 1, 0.25);
  c.add(0, 0, 0.5);
  c.add(1, 1, 1.0);
  CHECK(c.row(0).size() == 2);
  CHECK(c.max_row_defect() < 1e-15);
}

TEST_CASE("components of a hand-built chain") {
  // 0 <-> 1 -> 2 <-> 3, 4 -> 4, 5 -> {0, 4}
  SparseChain c(6);
  c.add(0, 1, 1.0);
  c.add(1, 0, 0.5);
  c.add(1, 2, 0.5);
  c.add(2, 3, 1.0);
  c.add(3, 2, 1.0);
  c.add(4, 4, 1.0);
  c.add(5, 0, 0.5);
  c.add(5, 4, 0.5);
  auto scc = strongly_connected_components(c);
  std::sort(scc.begin(), scc.end());
  REQUIRE(scc.size() == 4);
  CHECK(scc[0] == std::vector<std::size_t>{0, 1});
  CHECK(scc[1] == std::vector<std::size_t>{2, 3});
  CHECK(scc[2] == std::vector<std::size_t>{4});
  CHECK(scc[3] == std::vector<std::size_t>{5});
  auto closed = closed_classes(c);
  std::sort(closed.begin(), closed.end());
  REQUIRE(closed.size() == 2);
  CHECK(closed[0] == std::vector<std::size_t>{2, 3});
  CHECK(closed[1] == std::vector<std::size_t>{4});
  CHECK(reachable_from(c, 0) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(reachable_from(c, 5).size() == 6);

  // From 5: half goes to {4}; the other half reaches {2, 3} surely.
  const auto a = absorption_probabilities(c, closed, 5);
  CHECK(a[0] == doctest::Approx(0.5));
  CHECK(a[1] == doctest::Approx(0.5));
  const auto lim = limit_distribution(c, 5);
  CHECK(lim.multichain);
  CHECK(lim.reachable_closed_classes == 2);
  CHECK(lim.pi[2] == doctest::Approx(0.25));
  CHECK(lim.pi[3] == doctest::Approx(0.25));
  CHECK(lim.pi[4] == doctest::Approx(0.5));
  CHECK(lim.pi[0] == 0.0);
  CHECK_FALSE(limit_distribution(c, 0).multichain);
}

TEST_CASE("gambler's ruin absorption") {
  // States 0..N, absorbing ends, up with probability q.
  const int N = 6;
  const double q = 0.4;
  SparseChain c(N + 1);
  c.add(0, 0, 1.0);
  c.add(N, N, 1.0);
  for (int i = 1; i < N; ++i) {
    c.add(i, i + 1, q);
    c.add(i, i - 1, 1 - q);
  }
  const auto closed = closed_classes(c);
  REQUIRE(closed.size() == 2);
  const double ratio = (1 - q) / q;
  for (int start = 1; start < N; ++start) {
    const auto a = absorption_probabilities(c, closed, start);
    const double win = (1 - std::pow(ratio, start)) / (1 - std::pow(ratio, N));
    const std::size_t top = closed[0][0] == static_cast<std::size_t>(N) ? 0 : 1;
    CHECK(a[top] == doctest::Approx(win).epsilon(1e-10));
    CHECK(a[1 - top] == doctest::Approx(1 - win).epsilon(1e-10));
  }
}

TEST_CASE("two-state stationary distribution") {
  wpcn::testing::Gen gen(41);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = gen.uniform(0.01, 1.0), b = gen.uniform(0.01, 1.0);
    SparseChain c(2);
    c.add(0, 1, a);
    c.add(0, 0, 1 - a);
    c.add(1, 0, b);
    c.add(1, 1, 1 - b);
    const auto pi = class_stationary(c, {0, 1});
    CHECK(pi[0] == doctest::Approx(b / (a + b)).epsilon(1e-10));
    CHECK(pi[1] == doctest::Approx(a / (a + b)).epsilon(1e-10));
  }
}

TEST_CASE("periodic class still has its uniform limit") {
  SparseChain c(3);
  c.add(0, 1, 1.0);
  c.add(1, 2, 1.0);
  c.add(2, 0, 1.0);
  const auto lim = limit_distribution(c, 0);
  for (double v : lim.pi) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(fixed_point_residual(c, lim.pi) < 1e-12);
}

TEST_CASE("random chains: limit is a normalized fixed point") {
  wpcn::testing::Gen gen(42);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = gen.integer(2, 40);
    SparseChain c(n);
    for (int i = 0; i < n; ++i) {
      const int k = gen.integer(1, 3);
      std::vector<double> w(k);
      for (auto& x : w) x = gen.uniform(0.05, 1.0);
      const double s = total(w);
      for (int m = 0; m < k; ++m) c.add(i, gen.integer(0, n - 1), w[m] / s);
    }
    const auto start = static_cast<std::size_t>(gen.integer(0, n - 1));
    const auto lim = limit_distribution(c, start);
    CHECK(total(lim.pi) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fixed_point_residual(c, lim.pi) < 1e-8);
    for (double v : lim.pi) CHECK(v >= -1e-14);
    // Unreachable states carry no mass.
    const auto reach = reachable_from(c, start);
    double outside = 1.0;
    for (auto s : reach) outside -= lim.pi[s];
    CHECK(std::abs(outside) < 1e-10);
  }
}
