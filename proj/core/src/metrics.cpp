#include "ej/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ej/error.h"

namespace ej {

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::mae: return "mae";
    case Metric::mse: return "mse";
    case Metric::rmse: return "rmse";
    case Metric::smape: return "smape";
    case Metric::mase: return "mase";
    case Metric::crps: return "crps";
  }
  return "unknown";
}

Metric metric_from_string(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  std::string lowered(name);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Metric m : kAllMetrics) {
    if (to_string(m) == lowered) return m;
  }
  fail(ErrorKind::invalid_argument, "unknown metric '" + std::string(name) + "'");
}

bool is_point_metric(Metric m) noexcept { return m != Metric::crps; }

QuantileForecast QuantileForecast::ingest(std::vector<double> levels,
                                          std::vector<std::vector<double>> rows) {
  if (levels.empty()) fail(ErrorKind::missing_quantiles, "quantile forecast has no levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
      fail(ErrorKind::invalid_argument, "quantile level outside (0, 1)");
    }
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      fail(ErrorKind::invalid_argument, "quantile levels must be strictly ascending");
    }
  }
  for (auto& row : rows) {
    if (row.size() != levels.size()) {
      fail(ErrorKind::length_mismatch, "quantile row width does not match level count");
    }
    std::sort(row.begin(), row.end());
  }
  return QuantileForecast{std::move(levels), std::move(rows)};
}

double pinball(double level, double truth, double quantile) noexcept {
  const double diff = truth - quantile;
  return diff >= 0.0 ? level * diff : (level - 1.0) * diff;
}

double crps_from_quantiles(std::span<const double> truth, const QuantileForecast& qf) {
  if (qf.levels.empty()) fail(ErrorKind::missing_quantiles, "CRPS needs at least one quantile level");
  if (qf.horizon() != truth.size()) {
    fail(ErrorKind::length_mismatch, "quantile horizon does not match truth length");
  }
  if (truth.empty()) fail(ErrorKind::length_mismatch, "empty evaluation window");
  double acc = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    for (std::size_t l = 0; l < qf.levels.size(); ++l) {
      acc += 2.0 * pinball(qf.levels[l], truth[t], qf.values[t][l]);
    }
  }
  return acc / static_cast<double>(truth.size() * qf.levels.size());
}

double mase_denominator(const MaseContext& ctx) {
  if (ctx.period < 1) fail(ErrorKind::invalid_argument, "MASE period must be >= 1");
  const auto p = static_cast<std::size_t>(ctx.period);
  if (ctx.history.size() <= p) {
    fail(ErrorKind::insufficient_history, "MASE history must be longer than one period");
  }
  double acc = 0.0;
  for (std::size_t t = p; t < ctx.history.size(); ++t) {
    acc += std::abs(ctx.history[t] - ctx.history[t - p]);
  }
  const double denom = acc / static_cast<double>(ctx.history.size() - p);
  if (denom == 0.0) {
    fail(ErrorKind::zero_denominator, "MASE denominator is zero (constant history)");
  }
  return denom;
}

double score(Metric metric, std::span<const double> truth, std::span<const double> forecast,
             const MaseContext* mase) {
  if (metric == Metric::crps) {
    fail(ErrorKind::missing_quantiles, "CRPS requires a quantile forecast");
  }
  if (truth.size() != forecast.size()) {
    fail(ErrorKind::length_mismatch, "truth has " + std::to_string(truth.size()) +
                                         " steps but forecast has " +
                                         std::to_string(forecast.size()));
  }
  if (truth.empty()) fail(ErrorKind::length_mismatch, "empty evaluation window");
  const auto n = static_cast<double>(truth.size());

  double acc = 0.0;
  switch (metric) {
    case Metric::mae:
    case Metric::mase:
      for (std::size_t i = 0; i < truth.size(); ++i) acc += std::abs(forecast[i] - truth[i]);
      acc /= n;
      if (metric == Metric::mase) {
        if (mase == nullptr) {
          fail(ErrorKind::invalid_argument, "MASE requires in-sample history and a period");
        }
        acc /= mase_denominator(*mase);
      }
      return acc;
    case Metric::mse:
    case Metric::rmse:
      for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = forecast[i] - truth[i];
        acc += e * e;
      }
      acc /= n;
      return metric == Metric::rmse ? std::sqrt(acc) : acc;
    case Metric::smape:
      for (std::size_t i = 0; i < truth.size(); ++i) {
        const double num = std::abs(forecast[i] - truth[i]);
        const double den = std::abs(truth[i]) + std::abs(forecast[i]);
        if (den > 0.0) acc += 2.0 * num / den;
      }
      return acc / n;
    case Metric::crps:
      break;
  }
  return acc;
}

double score(Metric metric, std::span<const double> truth, const ModelForecast& forecast,
             const MaseContext* mase) {
  if (metric == Metric::crps) {
    if (!forecast.quantiles) {
      fail(ErrorKind::missing_quantiles, "CRPS requires a quantile forecast");
    }
    return crps_from_quantiles(truth, *forecast.quantiles);
  }
  return score(metric, truth, std::span<const double>(forecast.point), mase);
}

}  // namespace ej
