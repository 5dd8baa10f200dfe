#pragma once

#include <array>
#include <string>
#include <vector>

#include "ej/metrics.h"
#include "ej/stl.h"

namespace ej {

// Characteristic function over the eight component coalitions, indexed by
// ComponentSubset::mask().
using CoalitionValues = std::array<double, 8>;

// Weights of the four marginal contributions of a player in a three-player
// game: joining the empty set, each singleton, and the other pair.
inline constexpr std::array<double, 4> kCoalitionWeights = {1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0,
                                                            1.0 / 3.0};

struct ShapleyValues {
  std::array<double, 3> values{};  // indexed by Component
  double error_term = 0.0;         // f(TSR) - f(empty) - sum(values)
};

ShapleyValues exact_shapley(const CoalitionValues& f);

struct ModelShap {
  std::string model_id;
  std::array<double, 3> raw{};         // signed, metric units
  std::array<double, 3> normalized{};  // |raw| / sum |raw|; zeros when all raw are 0
  double error_term = 0.0;
  CoalitionValues coalitions{};

  double raw_of(Component c) const { return raw[static_cast<std::size_t>(c)]; }
  double normalized_of(Component c) const { return normalized[static_cast<std::size_t>(c)]; }
};

struct ShapReport {
  Metric metric = Metric::mae;
  std::vector<ModelShap> models;

  const ModelShap* find(const std::string& model_id) const;
};

// f(S) = score(metric, reconstruct_subset(target, S), forecast) for all eight S.
CoalitionValues coalition_values(const Decomposition& target, const ModelForecast& forecast,
                                 Metric metric, const MaseContext* mase = nullptr);

// `target` is the decomposition restricted to the forecast window.
ModelShap shapley_attribution(std::string model_id, const Decomposition& target,
                              const ModelForecast& forecast, Metric metric,
                              const MaseContext* mase = nullptr);

std::array<double, 3> normalize_magnitudes(const std::array<double, 3>& raw);

}  // namespace ej
