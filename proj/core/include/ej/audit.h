#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ej/faithfulness.h"
#include "ej/metrics.h"
#include "ej/simplex.h"

namespace ej {

enum class Decision { accept, continue_ };

std::string_view to_string(Decision d) noexcept;
Decision decision_from_string(std::string_view name);

using AspectScores = std::array<double, 9>;

// Record kinds: "optimization" for a judged optimizer run, "refinement" for
// the adjustment applied to the selected vector after the loop.
inline constexpr std::string_view kOptimizationRecord = "optimization";
inline constexpr std::string_view kRefinementRecord = "refinement";

struct AuditRecord {
  int iteration = 0;
  std::string kind{kOptimizationRecord};
  WeightVector weights;
  std::vector<WeightVector> fold_weights;
  Metric metric = Metric::mse;
  double objective = 0.0;          // cross-validated score of `weights` under `metric`
  double uniform_objective = 0.0;  // same for equal weights
  double heldout_score = 0.0;      // next-fold score under the evaluation metric
  double confidence = 0.0;
  double faithfulness = 0.0;  // signed score in [-1, 1]
  double seasonality_risk = 0.0;
  Decision decision = Decision::continue_;
  std::optional<Metric> next_metric;
  Decision ground_truth = Decision::continue_;
  ExplanationClaims claims;
  AspectScores aspect_scores{};
  std::vector<double> weight_adjustment;
  std::string judge;    // backend that produced the verdict
  std::string trigger;  // decision rule that fired
  std::vector<std::string> flags;  // e.g. low_fidelity, rule_fallback
  std::optional<std::string> error;

  bool failed() const noexcept { return error.has_value(); }
  bool has_flag(std::string_view f) const;
};

void to_json(nlohmann::json& j, const AuditRecord& r);
void from_json(const nlohmann::json& j, AuditRecord& r);

using AuditTrail = std::vector<AuditRecord>;

// One record per line. Non-finite reals are written as the strings "inf",
// "-inf" or "nan" so that lines stay valid JSON.
std::string to_jsonl(const AuditTrail& trail);
AuditTrail parse_jsonl(std::string_view text);
void write_jsonl(const std::filesystem::path& path, const AuditTrail& trail);
AuditTrail read_jsonl(const std::filesystem::path& path);

nlohmann::json real_to_json(double v);
double real_from_json(const nlohmann::json& j);

}  // namespace ej
