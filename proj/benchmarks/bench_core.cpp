#include <benchmark/benchmark.h>

#include <random>

#include "roughstop/engines.hpp"
#include "roughstop/gbt.hpp"
#include "roughstop/kernels.hpp"
#include "roughstop/pricing.hpp"
#include "roughstop/roughness.hpp"
#include "roughstop/signatures.hpp"

using namespace roughstop;

namespace {

EngineParams params() {
  EngineParams p;
  p.rho = -0.7;
  p.eta = 0.3;
  return p;
}

PathEnsemble heston(std::size_t paths, std::size_t steps, std::uint64_t seed = 1) {
  SimulationSpec spec;
  spec.paths = paths;
  spec.steps = steps;
  spec.seed = seed;
  return simulate_heston(params(), spec);
}

}  // namespace

static void BM_SignatureSlices(benchmark::State& state) {
  const auto e = heston(static_cast<std::size_t>(state.range(0)), 10);
  const auto grid = ExerciseGrid::daily(e);
  for (auto _ : state) benchmark::DoNotOptimize(signature_slices(e, ChannelSet{}, grid.indices));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SignatureSlices)->Arg(1 << 10)->Arg(1 << 13)->Unit(benchmark::kMillisecond);

static void BM_LogSignature(benchmark::State& state) {
  std::mt19937_64 g(3);
  std::normal_distribution<double> z;
  std::vector<double> inc{0.1, z(g), z(g)};
  const auto s = chen_product(segment_signature(inc), segment_signature(std::vector<double>{0.1, z(g), z(g)}));
  for (auto _ : state) benchmark::DoNotOptimize(log_signature(s));
}
BENCHMARK(BM_LogSignature);

static void BM_RffEmbedRows(benchmark::State& state) {
  const auto e = heston(1 << 12, 10);
  const std::vector<std::size_t> at{10};
  const auto sigs = signature_slices(e, ChannelSet{}, at)[0];
  const auto map = sample_rff(sigs.cols(), static_cast<std::size_t>(state.range(0)), 1.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(rff_embed_rows(sigs, map));
}
BENCHMARK(BM_RffEmbedRows)->Arg(32)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_Heston(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(heston(static_cast<std::size_t>(state.range(0)), 10));
}
BENCHMARK(BM_Heston)->Arg(1 << 13)->Arg(1 << 15)->Unit(benchmark::kMillisecond);

static void BM_RoughBergomi(benchmark::State& state) {
  SimulationSpec spec;
  spec.paths = static_cast<std::size_t>(state.range(0));
  spec.steps = static_cast<std::size_t>(state.range(1));
  EngineParams p = params();
  p.eta = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_rbergomi(p, constant_hurst(0.1, spec.steps), spec));
}
BENCHMARK(BM_RoughBergomi)->Args({1 << 13, 10})->Args({1 << 13, 64})->Unit(benchmark::kMillisecond);

static void BM_RollingHurst(benchmark::State& state) {
  std::mt19937_64 g(9);
  std::normal_distribution<double> z(0, 0.01);
  std::vector<double> r(2000);
  for (auto& x : r) x = z(g);
  for (auto _ : state) benchmark::DoNotOptimize(rolling_hurst(r, 32));
}
BENCHMARK(BM_RollingHurst);

static void BM_Gbt(benchmark::State& state) {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Matrix x(n, 5);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 5; ++j) x(i, j) = u(g);
    y[i] = x(i, 0) * x(i, 1) + u(g) * 0.1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_gbt(x, y, GbtConfig{}));
}
BENCHMARK(BM_Gbt)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_PrimalAndDual(benchmark::State& state) {
  const auto kind = static_cast<RegressorKind>(state.range(0));
  const auto train = heston(1 << 12, 10, 1);
  const auto grid = ExerciseGrid::daily(train);
  const auto sigs = signature_slices(train, ChannelSet{}, grid.control_points());
  const OptionSpec put;
  PrimalConfig pc;
  pc.mlp.epochs = 5;
  DualConfig dc;
  dc.iterations = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_continuation(train, sigs, grid, kind, put, pc));
    benchmark::DoNotOptimize(fit_martingale_control(train, sigs, grid, kind, put, dc));
  }
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_PrimalAndDual)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
