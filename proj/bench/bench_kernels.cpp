// Serial reference against OpenMP kernel for each data-parallel stage.
// Run with OMP_NUM_THREADS set to compare worker counts.

#include <benchmark/benchmark.h>

#include "hyperadia/adiabatic.hpp"
#include "hyperadia/matrixmethod.hpp"
#include "hyperadia/phaseshift.hpp"

namespace {

using namespace hyperadia;

const StepPotential kPot = StepPotential::from_lambda_star(10.0);

void BM_Sweep(benchmark::State& state) {
  const auto grid = make_grid(1.0, 1e3, static_cast<int>(state.range(0)), true);
  for (auto _ : state) benchmark::DoNotOptimize(sweep({0, 1, 1}, kPot, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto grid = make_grid(1.0, 1e3, static_cast<int>(state.range(0)), true);
  for (auto _ : state) benchmark::DoNotOptimize(sweep_parallel({0, 1, 1}, kPot, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PotentialMatrixSerial(benchmark::State& state) {
  const RitzBasisSpec spec{{1, 2, 0}, static_cast<int>(state.range(0)), 0};
  for (auto _ : state) benchmark::DoNotOptimize(potential_matrix_serial(spec, kPot, 5.0));
}

void BM_PotentialMatrix(benchmark::State& state) {
  const RitzBasisSpec spec{{1, 2, 0}, static_cast<int>(state.range(0)), 0};
  for (auto _ : state) benchmark::DoNotOptimize(potential_matrix(spec, kPot, 5.0));
}

void BM_TableBuild(benchmark::State& state) {
  EffectivePotentialTable::Options opts;
  opts.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(EffectivePotentialTable::build({0, 0, 0}, kPot, opts));
}

std::vector<double> k_grid() { return make_grid(1e-4, 1e-1, 16, true); }

void BM_PhaseSweepSerial(benchmark::State& state) {
  const auto table = EffectivePotentialTable::build({1, 0, 0}, kPot);
  const auto ks = k_grid();
  for (auto _ : state) benchmark::DoNotOptimize(phase_shift_sweep(table, ks, {}, false));
}

void BM_PhaseSweepParallel(benchmark::State& state) {
  const auto table = EffectivePotentialTable::build({1, 0, 0}, kPot);
  const auto ks = k_grid();
  for (auto _ : state) benchmark::DoNotOptimize(phase_shift_sweep(table, ks, {}, true));
}

}  // namespace

BENCHMARK(BM_Sweep)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PotentialMatrixSerial)->Arg(60)->Arg(140)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PotentialMatrix)->Arg(60)->Arg(140)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TableBuild)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhaseSweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhaseSweepParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
