#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ej/audit.h"
#include "ej/shap.h"

namespace ej {

struct IterationShap {
  int iteration = 0;
  ShapReport report;
};

struct IterationReflection {
  int iteration = 0;
  Metric metric = Metric::mse;
  AspectScores aspects{};
  double confidence = 0.0;
  double faithfulness = 0.0;
  bool below_floor = false;
  bool failed = false;
  std::string note;
};

struct DecisionReflection {
  int iteration = 0;
  Decision decision = Decision::continue_;
  std::string justification;
};

struct FinalReflection {
  std::vector<std::string> model_ids;
  std::vector<double> mean_weights;  // across successful optimization records
  std::vector<std::string> exclusions;
  std::vector<std::string> sign_disagreements;
  std::string metric_progression;
  std::string summary;
};

struct Reflection {
  std::vector<IterationReflection> iteration_level;
  std::vector<DecisionReflection> decision_level;
  FinalReflection final_level;
};

// Three-level synthesis over a non-empty trail. Only records present in the
// trail are referenced; SHAP reports are matched to records by iteration.
Reflection reflect(const AuditTrail& trail, const std::vector<std::string>& model_ids,
                   const std::vector<IterationShap>& shap, double faithfulness_floor = 0.5);

void to_json(nlohmann::json& j, const Reflection& r);

}  // namespace ej
