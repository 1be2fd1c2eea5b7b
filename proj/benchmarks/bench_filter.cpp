#include <benchmark/benchmark.h>

#include "jumpfilter/filter.hpp"
#include "jumpfilter/models.hpp"
#include "jumpfilter/simulate.hpp"

namespace {

void BM_PropagateStep(benchmark::State& state) {
  using namespace jumpfilter;
  const ModelSpec model = make_model("jump-shared-1d");
  const double T = 0.05, dt = 1e-3;
  const PathBundle bundle =
      sample_bundle(T, dt, model.act0, model.act1, BundleDims{1, 1}, 11);
  Rng x0rng(3);
  const SystemPath path =
      simulate_system(model.coeffs, model.pi0_sampler(x0rng), model.y0, bundle);
  const ObservationRecord obs = observation_record(path);
  FilterOptions opt;
  opt.seed = 5;
  const FilterState st =
      init_filter(model.pi0_sampler, static_cast<int>(state.range(0)), 0.01, 17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        propagate(st, model.coeffs, model.act0, obs, 0.0, T, opt));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) *
                          static_cast<long>(obs.times.size() - 1));
}
BENCHMARK(BM_PropagateStep)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SimulatePath(benchmark::State& state) {
  using namespace jumpfilter;
  const ModelSpec model = make_model("jump-shared-1d");
  Rng x0rng(3);
  const Vec x0 = model.pi0_sampler(x0rng);
  for (auto _ : state) {
    const PathBundle bundle =
        sample_bundle(1.0, 1e-3, model.act0, model.act1, BundleDims{1, 1}, 11);
    benchmark::DoNotOptimize(simulate_system(model.coeffs, x0, model.y0, bundle));
  }
}
BENCHMARK(BM_SimulatePath)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
