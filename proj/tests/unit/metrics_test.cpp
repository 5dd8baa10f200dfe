#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ej/error.h"
#include "ej/metrics.h"

using ej::Metric;

namespace {

double naive_pinball(double tau, double y, double q) {
  return y >= q ? tau * (y - q) : (1.0 - tau) * (q - y);
}

}  // namespace

TEST(Metrics, PerfectForecastScoresZero) {
  const std::vector<double> y{1, 2, 3};
  for (auto m : {Metric::mae, Metric::mse, Metric::rmse, Metric::smape}) {
    EXPECT_EQ(ej::score(m, y, y), 0.0) << ej::to_string(m);
  }
  ej::MaseContext ctx{{1, 2, 4, 7}, 1};
  EXPECT_EQ(ej::score(Metric::mase, y, y, &ctx), 0.0);
}

TEST(Metrics, SmapeRatioConvention) {
  const std::vector<double> y{100}, f{50};
  EXPECT_NEAR(ej::score(Metric::smape, y, f), 2.0 / 3.0, 1e-15);
}

TEST(Metrics, MaseAgainstSeasonalNaive) {
  const std::vector<double> y{3, 4}, f{4, 5};
  ej::MaseContext ctx{{1, 2, 3}, 1};
  EXPECT_DOUBLE_EQ(ej::mase_denominator(ctx), 1.0);
  EXPECT_DOUBLE_EQ(ej::score(Metric::mase, y, f, &ctx), 1.0);
}

TEST(Metrics, MaseErrors) {
  const std::vector<double> y{3}, f{4};
  ej::MaseContext flat{{2, 2, 2}, 1};
  try {
    ej::score(Metric::mase, y, f, &flat);
    FAIL();
  } catch (const ej::Error& e) {
    EXPECT_EQ(e.kind(), ej::ErrorKind::zero_denominator);
  }
  EXPECT_THROW(ej::score(Metric::mase, y, f, nullptr), ej::Error);
}

TEST(Metrics, LengthMismatch) {
  const std::vector<double> y{1, 2}, f{1};
  try {
    ej::score(Metric::mae, y, f);
    FAIL();
  } catch (const ej::Error& e) {
    EXPECT_EQ(e.kind(), ej::ErrorKind::length_mismatch);
  }
}

TEST(Metrics, RmseIsRootOfMse) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> y(12), f(12);
    for (auto& v : y) v = n(rng);
    for (auto& v : f) v = n(rng);
    EXPECT_NEAR(ej::score(Metric::rmse, y, f), std::sqrt(ej::score(Metric::mse, y, f)), 1e-12);
  }
}

TEST(Metrics, ScaleProperties) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1, 10);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> y(8), f(8), hist(16);
    for (auto& v : y) v = u(rng);
    for (auto& v : f) v = u(rng);
    for (auto& v : hist) v = u(rng);
    const double c = u(rng);
    auto scaled = [c](std::vector<double> v) {
      for (auto& x : v) x *= c;
      return v;
    };
    EXPECT_NEAR(ej::score(Metric::smape, scaled(y), scaled(f)), ej::score(Metric::smape, y, f), 1e-12);
    EXPECT_NEAR(ej::score(Metric::mse, scaled(y), scaled(f)), c * c * ej::score(Metric::mse, y, f), 1e-9);
    EXPECT_NEAR(ej::score(Metric::mae, scaled(y), scaled(f)), c * ej::score(Metric::mae, y, f), 1e-9);
    ej::MaseContext a{hist, 2}, b{scaled(hist), 2};
    EXPECT_NEAR(ej::score(Metric::mase, scaled(y), scaled(f), &b), ej::score(Metric::mase, y, f, &a), 1e-9);
  }
}

TEST(Crps, SingleMedianLevel) {
  const std::vector<double> y{10};
  auto exact = ej::QuantileForecast::ingest({0.5}, {{10.0}});
  EXPECT_EQ(ej::crps_from_quantiles(y, exact), 0.0);
  auto off = ej::QuantileForecast::ingest({0.5}, {{8.0}});
  EXPECT_DOUBLE_EQ(ej::crps_from_quantiles(y, off), 2.0);
}

TEST(Crps, DegenerateQuantilesAtTruth) {
  const std::vector<double> levels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const std::vector<double> y{4, -2};
  auto q = ej::QuantileForecast::ingest(levels, {std::vector<double>(9, 4.0), std::vector<double>(9, -2.0)});
  EXPECT_EQ(ej::crps_from_quantiles(y, q), 0.0);
}

TEST(Crps, MatchesPinballAverage) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  const std::vector<double> levels{0.1, 0.25, 0.5, 0.75, 0.9};
  for (int t = 0; t < 20; ++t) {
    std::vector<double> y(6);
    std::vector<std::vector<double>> rows(6, std::vector<double>(levels.size()));
    for (auto& v : y) v = n(rng);
    for (auto& r : rows) {
      for (auto& v : r) v = n(rng);
      std::sort(r.begin(), r.end());
    }
    double expect = 0.0;
    for (std::size_t h = 0; h < y.size(); ++h) {
      for (std::size_t l = 0; l < levels.size(); ++l) expect += 2.0 * naive_pinball(levels[l], y[h], rows[h][l]);
    }
    expect /= static_cast<double>(y.size() * levels.size());
    auto q = ej::QuantileForecast::ingest(levels, rows);
    EXPECT_NEAR(ej::crps_from_quantiles(y, q), expect, 1e-12);
  }
}

TEST(Crps, IngestSortsCrossedQuantiles) {
  auto q = ej::QuantileForecast::ingest({0.1, 0.9}, {{5.0, 1.0}});
  EXPECT_EQ(q.values[0][0], 1.0);
  EXPECT_EQ(q.values[0][1], 5.0);
  EXPECT_THROW(ej::QuantileForecast::ingest({0.9, 0.1}, {{1.0, 2.0}}), ej::Error);
  EXPECT_THROW(ej::QuantileForecast::ingest({0.0, 0.5}, {{1.0, 2.0}}), ej::Error);
}

TEST(Crps, RequiresQuantiles) {
  const std::vector<double> y{1};
  ej::ModelForecast f{{1.0}, std::nullopt};
  try {
    ej::score(Metric::crps, y, f);
    FAIL();
  } catch (const ej::Error& e) {
    EXPECT_EQ(e.kind(), ej::ErrorKind::missing_quantiles);
  }
}

TEST(Pinball, Definition) {
  EXPECT_DOUBLE_EQ(ej::pinball(0.5, 10, 8), 1.0);
  EXPECT_DOUBLE_EQ(ej::pinball(0.9, 10, 8), 0.9 * 2);
  EXPECT_DOUBLE_EQ(ej::pinball(0.9, 8, 10), 0.1 * 2);
}

TEST(Metrics, NamesRoundTrip) {
  for (auto m : {Metric::mae, Metric::mse, Metric::rmse, Metric::smape, Metric::mase, Metric::crps}) {
    EXPECT_EQ(ej::metric_from_string(ej::to_string(m)), m);
  }
  EXPECT_EQ(ej::metric_from_string("MASE"), Metric::mase);
  EXPECT_THROW(ej::metric_from_string("mape"), ej::Error);
  EXPECT_FALSE(ej::is_point_metric(Metric::crps));
  EXPECT_TRUE(ej::is_point_metric(Metric::smape));
}
