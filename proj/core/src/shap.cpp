#include "ej/shap.h"

#include <cmath>

namespace ej {

ShapleyValues exact_shapley(const CoalitionValues& f) {
  ShapleyValues out;
  for (auto c : kComponents) {
    const auto bit = 1u << static_cast<unsigned>(c);
    const unsigned others = 7u & ~bit;
    const unsigned a = others & (others - 1u);  // lower of the two other bits
    const unsigned lo = others ^ a;
    const unsigned hi = a;
    const double joins_empty = f[bit] - f[0];
    const double joins_lo = f[lo | bit] - f[lo];
    const double joins_hi = f[hi | bit] - f[hi];
    const double joins_pair = f[7] - f[others];
    out.values[static_cast<std::size_t>(c)] =
        kCoalitionWeights[0] * joins_empty + kCoalitionWeights[1] * joins_lo +
        kCoalitionWeights[2] * joins_hi + kCoalitionWeights[3] * joins_pair;
  }
  out.error_term = (f[7] - f[0]) - (out.values[0] + out.values[1] + out.values[2]);
  return out;
}

const ModelShap* ShapReport::find(const std::string& model_id) const {
  for (const auto& m : models) {
    if (m.model_id == model_id) return &m;
  }
  return nullptr;
}

CoalitionValues coalition_values(const Decomposition& target, const ModelForecast& forecast,
                                 Metric metric, const MaseContext* mase) {
  CoalitionValues f{};
  for (unsigned mask = 0; mask < 8; ++mask) {
    const auto truth = reconstruct_subset(target, ComponentSubset::from_mask(mask));
    f[mask] = score(metric, truth, forecast, mase);
  }
  return f;
}

std::array<double, 3> normalize_magnitudes(const std::array<double, 3>& raw) {
  const double total = std::abs(raw[0]) + std::abs(raw[1]) + std::abs(raw[2]);
  std::array<double, 3> out{};
  if (total <= 0.0) return out;
  for (std::size_t i = 0; i < 3; ++i) out[i] = std::abs(raw[i]) / total;
  return out;
}

ModelShap shapley_attribution(std::string model_id, const Decomposition& target,
                              const ModelForecast& forecast, Metric metric,
                              const MaseContext* mase) {
  ModelShap out;
  out.model_id = std::move(model_id);
  out.coalitions = coalition_values(target, forecast, metric, mase);
  const auto sv = exact_shapley(out.coalitions);
  out.raw = sv.values;
  out.error_term = sv.error_term;
  out.normalized = normalize_magnitudes(out.raw);
  return out;
}

}  // namespace ej
