// Serial against OpenMP Bellman sweeps and slot-baseline averages.
#include <benchmark/benchmark.h>

#include "wpcn/bellman.hpp"
#include "wpcn/channel.hpp"
#include "wpcn/slot_oriented.hpp"

namespace {

using namespace wpcn;

struct Fixture {
  SystemParams p;
  GridSpec g;
  ChannelPmf pmf;

  explicit Fixture(int b_max) {
    p.dev[0].distance = 1.0;
    p.dev[1].distance = 3.0;
    g.b_max = {b_max, b_max};
    g.n_fading_bins = 3;
    pmf = build_channel_pmf(p, g, FadingModel::rayleigh());
  }
};

void sweep(benchmark::State& state, SweepKernel kernel) {
  const Fixture f(static_cast<int>(state.range(0)));
  const BellmanOperator op(f.p, f.g, f.pmf, 0.5);
  ValueFunction k(op.space()), out(op.space());
  for (std::size_t s = 0; s < k.size(); ++s) {
    const BatteryState b = op.space().state(s);
    k[s] = 0.3 * b.b1 + 0.2 * b.b2;
  }
  for (auto _ : state) {
    op.apply(k, out, nullptr, kernel);
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(k.size()));
}

void BM_SweepSerial(benchmark::State& state) { sweep(state, SweepKernel::kSerial); }
void BM_SweepParallel(benchmark::State& state) { sweep(state, SweepKernel::kParallel); }

BENCHMARK(BM_SweepSerial)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_SlotBaseline(benchmark::State& state) {
  Fixture f(2);
  f.g.n_fading_bins = static_cast<int>(state.range(0));
  f.pmf = build_channel_pmf(f.p, f.g, FadingModel::rayleigh(), false);
  for (auto _ : state) benchmark::DoNotOptimize(long_term_slot_reward(f.pmf, f.p));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.pmf.size()));
}
BENCHMARK(BM_SlotBaseline)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
