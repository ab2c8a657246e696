#include <benchmark/benchmark.h>

#include "spd/bell.hpp"
#include "spd/mcmc.hpp"
#include "spd/oracle.hpp"
#include "spd/synth.hpp"

using namespace spd;

namespace {

SpParams params(std::size_t n) {
  Rng rng(5);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 4) + 1;
  return SpParams::common(canonicalize(labels), 3.0, 0.2, ewens(1.0));
}

void BM_SpLogPmf(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = params(n);
  Rng rng(7);
  const auto perm = Permutation::random(n, rng);
  const auto q = sp_sample(p, perm, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sp_log_pmf(p, q, perm));
}
BENCHMARK(BM_SpLogPmf)->RangeMultiplier(4)->Range(8, 512);

void BM_SpSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = params(n);
  Rng rng(7);
  const auto perm = Permutation::random(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sp_sample(p, perm, rng));
}
BENCHMARK(BM_SpSample)->RangeMultiplier(4)->Range(8, 512);

void BM_ExactMarginal(benchmark::State& state) {
  const auto p = params(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exact_distribution(p, PermutationMarginal{}));
}
BENCHMARK(BM_ExactMarginal)->DenseRange(4, 6);

void BM_ExtendedBell(benchmark::State& state) {
  const int a = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(extended_bell(a, 3));
}
BENCHMARK(BM_ExtendedBell)->Arg(10)->Arg(50)->Arg(200);

void BM_Sweep(benchmark::State& state) {
  SynthSpec s;
  s.units = 20;
  s.times = 10;
  s.rows_per_cell = 2;
  const auto data = generate_synthetic(s).data;
  ModelSpec m;
  m.kind = static_cast<DependenceKind>(state.range(0));
  if (m.kind == DependenceKind::kIndependent) m.family = PriorFamily::kBaseline;
  m.sample_omega = m.sample_grit = m.kind != DependenceKind::kIndependent;
  m.omega = 5.0;
  m.grit = 0.1;
  Sampler sampler(data, m, McmcConfig::defaults_for(m.kind), RegressionPriors::defaults(4, 1), 3);
  for (auto _ : state) sampler.sweep();
  state.SetLabel(to_string(m.kind));
}
BENCHMARK(BM_Sweep)
    ->Arg(static_cast<int>(DependenceKind::kIndependent))
    ->Arg(static_cast<int>(DependenceKind::kTemporal))
    ->Arg(static_cast<int>(DependenceKind::kHierarchical))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
