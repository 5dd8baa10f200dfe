#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ej/metrics.h"
#include "ej/series.h"

namespace ej::cli {

// Member forecasts for every fold, read from bundles/<model_id>/fold_<k>.csv.
struct ForecastBundle {
  std::vector<std::string> model_ids;
  std::vector<std::vector<ModelForecast>> forecasts;  // [fold][model]
};

// Columns: step,point[,q_<level>...]. Throws DataError naming the offending
// file when it is missing, malformed, or its horizon disagrees with the fold.
ModelForecast read_forecast_csv(const std::filesystem::path& path, std::size_t horizon);

ForecastBundle load_bundle(const std::filesystem::path& dir,
                           const std::vector<std::string>& model_ids,
                           const std::vector<Fold>& folds);

}  // namespace ej::cli
