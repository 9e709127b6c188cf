#include <benchmark/benchmark.h>

#include <vector>

#include "rbpi/datasets.hpp"
#include "rbpi/intervals.hpp"
#include "rbpi/sequential.hpp"

namespace {

using namespace rbpi;

Dataset multi(std::size_t n) {
  RngStream rng(11);
  return gen_multi_output("friedman-grosse", n, 2.0, 0.9, 0.5, rng);
}

void BM_FitForest(benchmark::State& state) {
  const Dataset d = multi(static_cast<std::size_t>(state.range(0)));
  const auto bags = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(fit_forest(d, bags, RngStream(3)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_FitForest)->Args({64, 64})->Args({128, 64})->Args({128, 128})->Unit(benchmark::kMillisecond);

void BM_Calibrate(benchmark::State& state) {
  const Dataset d = multi(128);
  TrainedForest f = fit_forest(d, 64, RngStream(3));
  for (auto _ : state) benchmark::DoNotOptimize(calibrate(f));
}
BENCHMARK(BM_Calibrate)->Unit(benchmark::kMicrosecond);

void BM_PredictionDistribution(benchmark::State& state) {
  const auto method = static_cast<CorrelationMethod>(state.range(0));
  const Dataset d = multi(128);
  TrainedForest f = fit_forest(d, 64, RngStream(3));
  calibrate(f);
  const JackknifeBasis basis(f.bag_counts());
  const Matrix train_corr = training_correlation(f);
  const std::vector<double> x(8, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(prediction_distribution(f, x, method, train_corr, &basis));
  state.SetLabel(std::string(to_string(method)));
}
BENCHMARK(BM_PredictionDistribution)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_AcquisitionScore(benchmark::State& state) {
  PredictionDistribution dist;
  dist.mean = Vector::Constant(2, 20.0);
  dist.cov = Matrix::Identity(2, 2) * 9.0;
  dist.cov(0, 1) = dist.cov(1, 0) = 6.0;
  dist.sigma = Vector::Constant(2, 3.0);
  dist.correlation = dist.cov / 9.0;
  const std::vector<BoundObjective> obj = {{0, Direction::GreaterThan, 22.0}, {1, Direction::GreaterThan, 22.0}};
  RngStream rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(acquisition_score(dist, obj, static_cast<std::size_t>(state.range(0)), rng));
  }
}
BENCHMARK(BM_AcquisitionScore)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
