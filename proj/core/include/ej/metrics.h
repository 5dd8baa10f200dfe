#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ej {

// All metrics are lower-is-better.
enum class Metric { mae, mse, rmse, smape, mase, crps };

inline constexpr std::array<Metric, 6> kAllMetrics = {Metric::mae,   Metric::mse,  Metric::rmse,
                                                      Metric::smape, Metric::mase, Metric::crps};

std::string_view to_string(Metric m) noexcept;
Metric metric_from_string(std::string_view name);
bool is_point_metric(Metric m) noexcept;

struct QuantileForecast {
  std::vector<double> levels;               // strictly ascending, in (0, 1)
  std::vector<std::vector<double>> values;  // [horizon][level]

  std::size_t horizon() const noexcept { return values.size(); }

  // Validates levels and sorts every row so values are non-decreasing across
  // levels.
  static QuantileForecast ingest(std::vector<double> levels,
                                 std::vector<std::vector<double>> rows);
};

struct MaseContext {
  std::vector<double> history;  // in-sample observations preceding the window
  int period = 1;
};

// A member forecast for one window: point path plus optional quantiles.
struct ModelForecast {
  std::vector<double> point;
  std::optional<QuantileForecast> quantiles;
};

double score(Metric metric, std::span<const double> truth, std::span<const double> forecast,
             const MaseContext* mase = nullptr);
double score(Metric metric, std::span<const double> truth, const ModelForecast& forecast,
             const MaseContext* mase = nullptr);

double pinball(double level, double truth, double quantile) noexcept;
double crps_from_quantiles(std::span<const double> truth, const QuantileForecast& qf);

// In-sample seasonal-naive mean absolute error; throws ZeroDenominator when
// the history is constant at lag `period`.
double mase_denominator(const MaseContext& ctx);

}  // namespace ej
