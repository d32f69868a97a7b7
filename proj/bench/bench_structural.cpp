// Serial vs OpenMP assembly of the structural functions.

#include "semiinfo/zoo.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace semiinfo;

namespace {

const ZooModel& refined_cs(std::size_t points) {
  static std::map<std::size_t, ZooModel> cache;
  auto it = cache.find(points);
  if (it == cache.end()) it = cache.emplace(points, build_cox_cs(cox_cs_refined(points))).first;
  return it->second;
}

void BM_StructuralSerial(benchmark::State& state) {
  const ZooModel& m = refined_cs(static_cast<std::size_t>(state.range(0)));
  const ExpectationEngine e = make_engine(m, EngineKind::Exact);
  for (auto _ : state) benchmark::DoNotOptimize(structural_functions_serial(e, m.components, m.state));
}

void BM_StructuralParallel(benchmark::State& state) {
  const ZooModel& m = refined_cs(static_cast<std::size_t>(state.range(0)));
  const ExpectationEngine e = make_engine(m, EngineKind::Exact);
  for (auto _ : state) benchmark::DoNotOptimize(structural_functions(e, m.components, m.state));
}

void BM_MonteCarloMissingCov(benchmark::State& state) {
  static const ZooModel m = build_missing_cov({});
  const ExpectationEngine e = make_engine(m, EngineKind::MonteCarlo, static_cast<std::size_t>(state.range(0)), 11);
  for (auto _ : state) benchmark::DoNotOptimize(structural_functions(e, m.components, m.state));
}

}  // namespace

BENCHMARK(BM_StructuralSerial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StructuralParallel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloMissingCov)->Arg(20000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
