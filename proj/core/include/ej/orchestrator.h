#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ej/audit.h"
#include "ej/faithfulness.h"
#include "ej/judge.h"
#include "ej/reflection.h"
#include "ej/series.h"
#include "ej/simplex.h"
#include "ej/stl.h"

namespace ej {

struct ModelSpec {
  std::string id;
  std::vector<std::string> tags;  // capability tags, e.g. "seasonal", "trend"
  std::string description;
};

struct DecisionPolicy {
  double tolerance_coefficient = 0.001;
  int max_iterations = 3;

  void validate() const;
};

// Accept iff current - best <= tolerance_coefficient * best, or the
// iteration limit is reached.
Decision ground_truth_label(double current_score, double best_score, int iteration,
                            const DecisionPolicy& policy = {});

// Clip every delta entry to [-max_step, max_step], add, project to the simplex.
WeightVector apply_refinement(const WeightVector& w_star, std::span<const double> delta,
                              double max_step = 0.2);

struct OrchestratorConfig {
  std::string dataset;
  std::string dataset_description;
  std::vector<Metric> metric_pool{Metric::mse, Metric::mae, Metric::smape};
  OptimizerParams optimizer;
  DecisionPolicy policy;
  double refinement_max_step = 0.2;
  double faithfulness_floor = 0.5;
  Metric shap_metric = Metric::mae;
  Metric evaluation_metric = Metric::mae;
  FaithfulnessParams faithfulness;
  DecompositionParams decomposition;

  void validate() const;
};

struct OrchestrationInput {
  TimeSeries series;
  std::vector<ModelSpec> models;
  std::vector<Fold> folds;
  std::vector<std::vector<ModelForecast>> forecasts;  // [fold][model]

  void validate() const;
  std::vector<std::string> model_ids() const;
};

struct ProposalRequest {
  int iteration = 0;
  Metric metric = Metric::mse;
  const Fold* fold = nullptr;
  std::span<const double> truth;
  const ForecastMatrix* forecasts = nullptr;
  const MaseContext* mase = nullptr;
};

// Produces the weight vector for one fold of one iteration.
class WeightProposer {
 public:
  virtual ~WeightProposer() = default;
  virtual WeightVector propose(const ProposalRequest& request) = 0;
};

class OptimizerProposer final : public WeightProposer {
 public:
  explicit OptimizerProposer(OptimizerParams params = {}) : params_(params) {}
  WeightVector propose(const ProposalRequest& request) override;

 private:
  OptimizerParams params_;
};

struct OrchestrationResult {
  std::vector<std::string> model_ids;
  WeightVector final_weights;     // after refinement, if any
  WeightVector selected_weights;  // argmax-confidence record
  int selected_iteration = 0;
  AuditTrail trail;
  std::vector<IterationShap> shap_reports;
  Reflection reflection;
  std::vector<Metric> metric_pool;
  std::vector<std::vector<double>> cv_performance;  // [model][pool metric]
  DataFeatures features;
  double best_heldout_score = 0.0;  // reference for the ground-truth label
  std::string judge;
  bool deterministic = true;
};

// Runs the judge loop until acceptance or the iteration limit, then selects
// the explored vector with the highest confidence (earliest on ties).
OrchestrationResult run_orchestration(const OrchestrationInput& input,
                                      const OrchestratorConfig& config, Judge& judge,
                                      WeightProposer* proposer = nullptr);

// Index of the highest-confidence successful optimization record, earliest on ties.
std::optional<std::size_t> select_final(const AuditTrail& trail);

nlohmann::json summary_json(const OrchestrationResult& result, const OrchestratorConfig& config);
std::string render_markdown(const OrchestrationResult& result, const OrchestrationInput& input,
                            const OrchestratorConfig& config);

}  // namespace ej
