#include <benchmark/benchmark.h>

#include "jumpfilter/measure.hpp"
#include "jumpfilter/rng.hpp"

namespace {

jumpfilter::ParticleMeasure make_cloud(int n, int d) {
  jumpfilter::Rng rng(42);
  jumpfilter::ParticleMeasure mu(d);
  for (int i = 0; i < n; ++i) {
    jumpfilter::Vec x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.normal();
    mu.add(x, rng.uniform(-1.0, 1.0));
  }
  return mu;
}

void BM_Mollify(benchmark::State& state) {
  const auto mu = make_cloud(static_cast<int>(state.range(0)), 1);
  jumpfilter::Vec x(1);
  x << 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(jumpfilter::mollify(mu, 0.05, x));
}
BENCHMARK(BM_Mollify)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RhoEps(benchmark::State& state) {
  jumpfilter::Rng rng(7);
  const int p = static_cast<int>(state.range(0));
  std::vector<jumpfilter::Vec> pts(p);
  for (auto& y : pts) {
    y = jumpfilter::Vec(1);
    y << rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(jumpfilter::rho_eps(pts, 0.5));
}
BENCHMARK(BM_RhoEps)->Arg(2)->Arg(4)->Arg(6);

void BM_LpNormExact(benchmark::State& state) {
  const auto mu = make_cloud(static_cast<int>(state.range(0)), 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(jumpfilter::lp_norm_exact(mu, 0.5, 4));
}
BENCHMARK(BM_LpNormExact)->Arg(8)->Arg(16)->Arg(32);

}  // namespace
