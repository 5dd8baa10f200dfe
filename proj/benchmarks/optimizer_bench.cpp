#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "ej/simplex.h"

namespace {

struct Problem {
  std::vector<double> truth;
  ej::ForecastMatrix x;
  ej::MaseContext mase;
};

Problem make(std::size_t m, std::size_t h) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  Problem p;
  p.mase.period = 24;
  for (int t = 0; t < 240; ++t) p.mase.history.push_back(10 + 3 * std::sin(t * 0.26) + n(rng));
  for (std::size_t t = 0; t < h; ++t) p.truth.push_back(10 + 3 * std::sin(static_cast<double>(t) * 0.26) + n(rng));
  for (std::size_t i = 0; i < m; ++i) {
    ej::ModelForecast f;
    const double bias = n(rng);
    std::vector<std::vector<double>> rows;
    for (double y : p.truth) {
      f.point.push_back(y + bias + n(rng));
      rows.push_back({f.point.back() - 1.3, f.point.back(), f.point.back() + 1.3});
    }
    f.quantiles = ej::QuantileForecast::ingest({0.1, 0.5, 0.9}, rows);
    p.x.model_ids.push_back("m" + std::to_string(i));
    p.x.columns.push_back(std::move(f));
  }
  return p;
}

void BM_Optimize(benchmark::State& state, ej::Metric metric) {
  const auto p = make(static_cast<std::size_t>(state.range(0)), 48);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ej::optimize_weights(p.truth, p.x, metric, {}, &p.mase));
  }
}

void BM_BruteForce(benchmark::State& state) {
  const auto p = make(3, 48);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ej::brute_force_weights(p.truth, p.x, ej::Metric::mse, 0.01));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Optimize, mse, ej::Metric::mse)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK_CAPTURE(BM_Optimize, mae, ej::Metric::mae)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK_CAPTURE(BM_Optimize, crps, ej::Metric::crps)->Arg(3);
BENCHMARK(BM_BruteForce);
