#include <benchmark/benchmark.h>

#include "singdiff/field.hpp"
#include "singdiff/kernels.hpp"
#include "singdiff/sde.hpp"
#include "singdiff/verify.hpp"

using namespace singdiff;

static void BM_KernelKm(benchmark::State& state) {
  const KernelParams p = make_kernel_params(1.0, 1, 1.0);
  double r = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(k_m(p, r));
    r = r > 5.0 ? 0.1 : r + 0.01;
  }
}
BENCHMARK(BM_KernelKm);

static void BM_GreenFunction(benchmark::State& state) {
  const KernelParams p = make_kernel_params(1.0, 1, 1.0);
  double r = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(green_massive(p, r));
    r = r > 5.0 ? 0.1 : r + 0.01;
  }
}
BENCHMARK(BM_GreenFunction);

static void BM_BuildCovariance(benchmark::State& state) {
  GridSpec g;
  g.origin = {-2.0, -2.0};
  g.extent = {4.0, 4.0};
  g.nx = g.ny = static_cast<int>(state.range(0));
  const KernelParams p = make_kernel_params(1.0, 3, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(build_covariance(p, g).sum());
}
BENCHMARK(BM_BuildCovariance)->Arg(9)->Arg(17)->Unit(benchmark::kMillisecond);

static void BM_FieldSample(benchmark::State& state) {
  GridSpec g;
  g.origin = {-6.0, -6.0};
  g.extent = {12.0, 12.0};
  g.nx = g.ny = 49;
  const FieldSampler sampler(make_kernel_params(1.0, 3, 1.0), g);
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(1, i++).values.data());
}
BENCHMARK(BM_FieldSample)->Unit(benchmark::kMicrosecond);

static void BM_SdeEnsemble(benchmark::State& state) {
  const DiffusionSpec spec = make_preset("locally-elliptic", PresetParams{});
  EnsembleParams e;
  e.n_paths = static_cast<int>(state.range(0));
  e.dt = 1e-3;
  for (auto _ : state) {
    const EndpointEnsemble out = sample_endpoints(spec, 1.0, e, Construction::Sde);
    benchmark::DoNotOptimize(out.points.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(BM_SdeEnsemble)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
