#include <benchmark/benchmark.h>

#include "conecount/counting.hpp"
#include "conecount/enumeration.hpp"
#include "conecount/geometry.hpp"

namespace {

using namespace conecount;

void BM_CountAll(benchmark::State& state) {
  const EllipsoidForm E = EllipsoidForm::standard(static_cast<int>(state.range(0)));
  const double T = static_cast<double>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(count_all(E, T, 1));
  state.SetLabel("n=" + std::to_string(state.range(0)));
}
BENCHMARK(BM_CountAll)->Args({1, 4000})->Args({2, 500})->Args({2, 1000})->Args({3, 120})->Unit(benchmark::kMillisecond);

void BM_CountCap(benchmark::State& state) {
  const EllipsoidForm E = EllipsoidForm::standard(2);
  const KappaEstimate k = supplied_kappa(2, 1.0);
  Eigen::VectorXd alpha(3);
  alpha << 0.6, 0.0, 0.8;
  const double T = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(count_cap(E, alpha, 0.3, T, k, 1).count);
}
BENCHMARK(BM_CountCap)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_CapMeasure(benchmark::State& state) {
  double r = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cap_measure_exact(3, r));
    r = r < 1.9 ? r * 1.01 : 0.001;
  }
}
BENCHMARK(BM_CapMeasure);

}  // namespace

BENCHMARK_MAIN();
