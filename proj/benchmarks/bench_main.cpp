#include <benchmark/benchmark.h>

#include "agnostic/conformal.hpp"
#include "agnostic/data.hpp"
#include "agnostic/harness.hpp"
#include "agnostic/rng.hpp"
#include "agnostic/selectors.hpp"

using namespace agnostic;

namespace {

Dataset synthetic(Index n, Index p, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, p);
  Vector y(n);
  std::vector<std::string> names;
  for (Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    y(i) = x(i, 0) - 0.5 * x(i, 1) + rng.normal();
  }
  return Dataset(x, y, names);
}

const Dataset& wine() {
  static const Dataset d = load_csv(AGNOSTIC_DATA_DIR "/winequality-red.csv", "quality");
  return d;
}

}  // namespace

static void BM_LassoPath(benchmark::State& state) {
  const Dataset d = synthetic(state.range(0), state.range(1), 1);
  for (auto _ : state) {
    LassoPath path = lasso_path(d, 100, 1e-3);
    benchmark::DoNotOptimize(path);
  }
}
BENCHMARK(BM_LassoPath)->Args({200, 20})->Args({1000, 50})->Args({100, 500})->Unit(benchmark::kMillisecond);

static void BM_ForwardStepwise(benchmark::State& state) {
  const Dataset d = synthetic(state.range(0), state.range(1), 2);
  for (auto _ : state) {
    auto fit = forward_stepwise(d);
    benchmark::DoNotOptimize(fit);
  }
}
BENCHMARK(BM_ForwardStepwise)->Args({200, 10})->Args({2000, 50})->Unit(benchmark::kMillisecond);

static void BM_ConformalOls(benchmark::State& state) {
  const Dataset d = synthetic(state.range(0), 5, 3);
  const Vector x_new = Vector::Zero(5);
  for (auto _ : state) {
    ConformalResult r = conformal_interval(d, x_new, 0.1, PredictorSpec::ols_full());
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_ConformalOls)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_ConformalLasso(benchmark::State& state) {
  const Dataset d = synthetic(50, 10, 4);
  const Vector x_new = Vector::Zero(10);
  GridSpec grid;
  grid.points = 200;
  for (auto _ : state) {
    ConformalResult r = conformal_interval(d, x_new, 0.1, PredictorSpec::lasso(0.1), grid);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_ConformalLasso)->Unit(benchmark::kMillisecond);

static void BM_HarnessWine(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    HarnessResult r = run_harness(wine(), SelectorConfig{}, 0.05, seed++);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_HarnessWine)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
