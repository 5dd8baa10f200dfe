#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ej/judge.h"
#include "ej/orchestrator.h"
#include "ej/regime.h"
#include "ej/rewards.h"

namespace ej::cli {

struct DatasetConfig {
  std::string name;
  std::string description;
  std::string domain;
  std::string horizon_class;  // short | medium | long; derived from horizon when empty
  std::filesystem::path series;
  std::filesystem::path bundles;
  int period = 24;
  int n_folds = 5;
  std::size_t horizon = 24;
  std::size_t step = 0;  // 0 = horizon
};

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::vector<DatasetConfig> datasets;
  std::vector<ModelSpec> models;
  std::vector<Metric> metric_pool{Metric::mse, Metric::mae, Metric::smape};
  JudgeBackendConfig judge;
  OptimizerParams optimizer;
  DecisionPolicy policy;
  double refinement_max_step = 0.2;
  FaithfulnessParams faithfulness;
  double faithfulness_floor = 0.5;
  Metric shap_metric = Metric::mae;
  Metric evaluation_metric = Metric::mae;
  DecompositionParams decomposition;
  IncompatibilityParams incompatibility;
  RewardConfig rewards;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  // Throws ConfigError on violated invariants.
  void validate() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  OrchestratorConfig orchestrator(const DatasetConfig& ds) const;
  std::string horizon_class(const DatasetConfig& ds) const;
};

RunConfig parse_config(const nlohmann::json& j, std::filesystem::path base_dir);
RunConfig load_config(const std::filesystem::path& path);
// Canonical form with every default filled in; parse(dump(c)) == c.
nlohmann::json dump_config(const RunConfig& c);

}  // namespace ej::cli
