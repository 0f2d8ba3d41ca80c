#include <benchmark/benchmark.h>

#include "spinmetro/metrology.hpp"
#include "spinmetro/oracle.hpp"
#include "spinmetro/protocol.hpp"

using namespace spinmetro;

static void BM_SpinCoherent(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spin_coherent({0.7, 0.2}, n));
}
BENCHMARK(BM_SpinCoherent)->RangeMultiplier(10)->Range(100, 100000);

static void BM_TatSetup(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(TatPropagator(n));
}
BENCHMARK(BM_TatSetup)->Arg(400)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

static void BM_TatState(benchmark::State& state) {
  const TatPropagator prop(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(prop.state(1e-3));
}
BENCHMARK(BM_TatState)->Arg(400)->Arg(4000)->Unit(benchmark::kMillisecond);

static void BM_CollectiveMoments(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DickeState s = oat_state(1.0, 0.01, n);
  const DephasingModel model = DephasingModel::gaussian(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(collective_moments(s, model, Vec3::UnitZ(), 0.1, 0.3));
  }
}
BENCHMARK(BM_CollectiveMoments)->RangeMultiplier(10)->Range(100, 100000);

static void BM_CatUncertainty(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DephasingModel model = DephasingModel::gaussian(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(cat_uncertainty(1.0, n, 0.01, 1.0, model));
}
BENCHMARK(BM_CatUncertainty)->RangeMultiplier(100)->Range(100, 1000000);

static void BM_OptimizeOatChi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(optimize_oat_chi(n));
}
BENCHMARK(BM_OptimizeOatChi)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_OracleMoments(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const oracle::FullState rho = oracle::expose(oracle::pure(oracle::brute_tat(0.2, n), n),
                                               DephasingModel::gaussian(0.5), Vec3::UnitZ(), 0.3, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::moments(rho));
}
BENCHMARK(BM_OracleMoments)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

static void BM_TimeDomainPreparation(benchmark::State& state) {
  ProtocolOptions opts;
  opts.mode = PulseMode::time_domain;
  opts.rabi_ratio = 1.0 / 20.0;
  for (auto _ : state) benchmark::DoNotOptimize(prepare_cat(4, {0.8, 0.5}, opts));
}
BENCHMARK(BM_TimeDomainPreparation)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
