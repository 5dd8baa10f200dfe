#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ej/metrics.h"

namespace ej {

// Convex-combination weights: every entry >= 0 and the entries sum to 1.
class WeightVector {
 public:
  WeightVector() = default;
  // Entries within -1e-12 of zero are clamped to 0; throws InvalidArgument if
  // any entry is more negative or the sum is more than 1e-9 away from 1.
  explicit WeightVector(std::vector<double> weights);

  static WeightVector uniform(std::size_t m);
  static WeightVector vertex(std::size_t m, std::size_t index);

  std::size_t size() const noexcept { return w_.size(); }
  bool empty() const noexcept { return w_.empty(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const noexcept { return w_; }
  const std::vector<double>& vector() const noexcept { return w_; }

  double entropy() const noexcept;
  bool operator==(const WeightVector&) const = default;

 private:
  std::vector<double> w_;
};

// N x M matrix of member forecasts stored column-wise, one column per model.
struct ForecastMatrix {
  std::vector<std::string> model_ids;
  std::vector<ModelForecast> columns;

  std::size_t models() const noexcept { return columns.size(); }
  std::size_t horizon() const noexcept {
    return columns.empty() ? 0 : columns.front().point.size();
  }
  bool has_quantiles() const noexcept;

  // Throws on M < 2, ragged columns, non-finite entries or mismatched
  // quantile grids.
  void validate() const;

  std::vector<double> combine(std::span<const double> w) const;
  // Level-by-level weighted average of member quantiles.
  ModelForecast combine_forecast(std::span<const double> w) const;
  // True when every column carries the same forecast.
  bool columns_identical() const;
};

struct OptimizerParams {
  int max_iterations = 100;
  double step_tolerance = 1e-8;
  double objective_tolerance = 1e-10;
};

struct OptimizeResult {
  WeightVector weights;
  double objective = 0.0;
  double uniform_objective = 0.0;
  int iterations = 0;
  int starts = 1;
  int selected_start = 0;
  bool converged = false;
  bool degenerate = false;  // all columns identical; uniform weights returned
};

// Score of the ensemble Xw under `metric`.
double ensemble_objective(std::span<const double> truth, const ForecastMatrix& x, Metric metric,
                          std::span<const double> w, const MaseContext* mase = nullptr);

// Sequential quadratic programming over the probability simplex, started from
// uniform weights. Non-smooth or non-convex metrics are additionally started
// from every vertex; the best objective wins, ties going to the
// highest-entropy vector and then the lowest start index.
OptimizeResult optimize_weights(std::span<const double> truth, const ForecastMatrix& x,
                                Metric metric, const OptimizerParams& params = {},
                                const MaseContext* mase = nullptr);

// Euclidean projection onto {w >= 0, sum w = 1}.
WeightVector project_to_simplex(std::span<const double> v);

struct BruteForceResult {
  WeightVector weights;
  double objective = 0.0;
  std::size_t lattice_points = 0;
};

// Number of points of the simplex lattice with spacing grid_step for m models.
std::size_t simplex_lattice_size(std::size_t m, double grid_step);

// Exhaustive minimum over the simplex lattice (M <= 4, step in (0, 0.1],
// 1/step integral). Verification oracle for optimize_weights.
BruteForceResult brute_force_weights(std::span<const double> truth, const ForecastMatrix& x,
                                     Metric metric, double grid_step,
                                     const MaseContext* mase = nullptr);

}  // namespace ej
