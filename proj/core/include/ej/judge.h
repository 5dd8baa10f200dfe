#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ej/audit.h"
#include "ej/faithfulness.h"
#include "ej/metrics.h"
#include "ej/simplex.h"

namespace ej {

struct DataFeatures {
  double seasonal_strength = 0.0;  // [0, 1]
  double trend_strength = 0.0;     // [0, 1]
  int period = 1;
  std::size_t cv_window_length = 0;  // T_cv, samples covered by the CV folds
};

struct EvaluationContext {
  std::string dataset;
  std::vector<std::string> model_ids;
  std::vector<std::vector<std::string>> capability_tags;  // per model
  std::vector<Metric> metric_pool;
  std::vector<std::vector<double>> cv_performance;  // [model][pool metric], lower is better
  WeightVector current_weights;
  Metric current_metric = Metric::mse;
  double objective = 0.0;          // CV score of current_weights under current_metric
  double uniform_objective = 0.0;  // same for equal weights
  DataFeatures features;
  int iteration = 1;
  int max_iterations = 3;
  AuditTrail history;

  // Throws InvalidArgument when the table is incomplete or sizes disagree.
  void validate() const;
  std::size_t models() const noexcept { return model_ids.size(); }
  bool has_tag(std::size_t model, std::string_view tag) const;
};

nlohmann::json context_to_json(const EvaluationContext& ctx);

inline constexpr std::array<std::string_view, 9> kAspectNames = {
    "performance_weight_alignment", "mathematical_justification", "weight_distribution",
    "dataset_model_matching",       "model_complementarity",      "feature_reliability",
    "temporal_generalization",      "unexpected_patterns",        "overall_quality"};

struct JudgeVerdict {
  double confidence = 0.5;
  Decision decision = Decision::continue_;
  std::optional<Metric> next_metric;
  ExplanationClaims claims;
  AspectScores aspect_scores{};
  std::vector<double> weight_adjustment;  // optional refinement delta
  std::string backend;
  std::string trigger;  // rule that fired, or "verdict" for remote judges
  std::vector<std::string> flags;

  // Throws MalformedVerdict on out-of-range confidence or a continue
  // decision without a valid next metric.
  void validate(const EvaluationContext& ctx) const;
};

// Per-model skill in (0, 1]: mean over pool metrics of best score / score.
std::vector<double> skill_scores(const EvaluationContext& ctx);

// seasonal_strength * 1[T_cv < 2p] / (weight on seasonal-tagged models).
// +inf when the indicator fires and that weight is below 1e-9.
double compute_seasonality_risk(const EvaluationContext& ctx);

struct RubricScores {
  AspectScores aspects{};
  double confidence = 0.5;
};

RubricScores rule_rubric(const EvaluationContext& ctx);

// Fixed exploration order mse, rmse, mae, smape, mase, crps restricted to the
// pool; returns the entry after `current`, wrapping around.
Metric next_metric_in_rotation(const std::vector<Metric>& pool, Metric current);

// Claims the rule judge derives from the data features.
ExplanationClaims derive_claims(const EvaluationContext& ctx);

class Judge {
 public:
  virtual ~Judge() = default;
  virtual JudgeVerdict judge(const EvaluationContext& ctx) = 0;
  virtual std::string_view name() const noexcept = 0;
  virtual bool deterministic() const noexcept { return true; }
};

struct RuleJudgeParams {
  double accept_threshold = 0.85;
  double risk_threshold = 1.0;
};

class RuleJudge final : public Judge {
 public:
  explicit RuleJudge(RuleJudgeParams params = {}) : params_(params) {}
  JudgeVerdict judge(const EvaluationContext& ctx) override;
  std::string_view name() const noexcept override { return "rule"; }

 private:
  RuleJudgeParams params_;
};

enum class BackendKind { rule, remote };

struct JudgeBackendConfig {
  BackendKind kind = BackendKind::rule;
  std::string endpoint_url;
  std::string api_key_env;
  std::string model_name;
  int max_retries = 2;
  double timeout_seconds = 60.0;
  double accept_threshold = 0.85;
  bool allow_rule_fallback = true;

  void validate() const;
};

}  // namespace ej
