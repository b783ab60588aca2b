// Serial vs OpenMP-parallel kernels, and the membership-matrix reference vs
// the step-function calibrator. Arg(0) is serial, Arg(1) parallel.
#include <benchmark/benchmark.h>

#include <optional>
#include <vector>

#include "rac/calibrator.hpp"
#include "rac/harness.hpp"
#include "rac/population.hpp"

using namespace rac;

namespace {

UtilityMatrix bench_utility() {
  return UtilityMatrix({"No Action", "Antibiotics", "Quarantine", "Additional Testing"},
                       {"Normal", "Pneumonia", "COVID-19", "Lung Opacity"},
                       {{10, 0, 0, 1}, {2, 10, 3, 4}, {2, 3, 10, 4}, {4, 7, 8, 10}});
}

SyntheticData bench_data(std::size_t n_calib, std::size_t n_test) {
  const SyntheticSpec spec{random_population(4, 200, 0.5, 1), 5.0, n_calib, n_test, 2, kDefaultEpsilon};
  return generate(spec);
}

Execution exec_of(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void BM_RacBatch(benchmark::State& state) {
  const auto u = bench_utility();
  const auto data = bench_data(1000, 2000);
  const auto tests = data.test.forecasts();
  const RacCalibrator cal(u, data.calib, RacConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(rac_batch(cal, tests, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * tests.size());
}
BENCHMARK(BM_RacBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CalibratorBuild(benchmark::State& state) {
  const auto u = bench_utility();
  const auto data = bench_data(20000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(RacCalibrator(u, data.calib, RacConfig{}, exec_of(state)));
}
BENCHMARK(BM_CalibratorBuild)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CoverageMc(benchmark::State& state) {
  const auto u = bench_utility();
  const SyntheticSpec spec{random_population(4, 200, 0.5, 3), std::nullopt, 100, 1, 4, kDefaultEpsilon};
  for (auto _ : state) benchmark::DoNotOptimize(coverage_mc(spec, u, 0.1, 500, Method::rac, {}, exec_of(state)));
}
BENCHMARK(BM_CoverageMc)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  const auto u = bench_utility();
  const auto pop = random_population(4, 4, 1.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_population(pop, u, 0.1, exec_of(state)));
}
BENCHMARK(BM_BruteForce)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Per test point: quadratic membership matrix vs precomputed step function.
void BM_CalibrateReference(benchmark::State& state) {
  const auto u = bench_utility();
  const auto data = bench_data(state.range(0), 1);
  RacConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(reference::calibrate(data.calib, data.test[0].forecast, u, cfg));
}
BENCHMARK(BM_CalibrateReference)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_CalibrateFast(benchmark::State& state) {
  const auto u = bench_utility();
  const auto data = bench_data(state.range(0), 1);
  const RacCalibrator cal(u, data.calib, RacConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(cal.calibrate(data.test[0].forecast));
}
BENCHMARK(BM_CalibrateFast)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
