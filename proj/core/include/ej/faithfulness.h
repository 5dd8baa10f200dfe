#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ej/shap.h"
#include "ej/stl.h"

namespace ej {

enum class Direction { helps, hurts, neutral };

std::string_view to_string(Direction d) noexcept;
Direction direction_from_string(std::string_view name);
// Sign of the error change a claim implies for lower-is-better metrics.
double direction_sign(Direction d) noexcept;

struct ComponentClaim {
  std::string model;
  Component component = Component::trend;
  double importance = 0.0;  // [0, 1]
  Direction direction = Direction::neutral;

  bool operator==(const ComponentClaim&) const = default;
};

struct ExplanationClaims {
  std::vector<ComponentClaim> claims;
  std::string free_text;

  const ComponentClaim* find(std::string_view model, Component c) const;
  // Throws InvalidArgument on out-of-range importances.
  void validate() const;
  bool operator==(const ExplanationClaims&) const = default;
};

void to_json(nlohmann::json& j, const ComponentClaim& c);
void from_json(const nlohmann::json& j, ComponentClaim& c);
void to_json(nlohmann::json& j, const ExplanationClaims& c);
// Accepts either {"claims": [...], "free_text": ...} or a bare claim array.
void from_json(const nlohmann::json& j, ExplanationClaims& c);

enum class PatternKind { overstatement, understatement, wrong_direction, missed_pattern };

std::string_view to_string(PatternKind k) noexcept;

struct UnfaithfulnessPattern {
  PatternKind kind = PatternKind::overstatement;
  std::string model;
  Component component = Component::trend;
  double claimed_importance = 0.0;
  double shap_normalized = 0.0;
  double shap_raw = 0.0;

  std::string describe() const;
};

struct FaithfulnessParams {
  double tau_low = 0.1;
  double tau_high = 0.4;
};

struct FaithfulnessResult {
  std::optional<double> pcc;  // empty when either vector has zero variance
  double reward_score = 0.0;  // max(0, pcc), or rank_alignment when pcc is undefined
  double rank_alignment = 0.0;
  double magnitude_alignment = 0.0;
  double pattern_recognition = 0.0;
  std::vector<UnfaithfulnessPattern> patterns;

  // Signed score recorded in audit trails: pcc when defined, reward otherwise.
  double signed_score() const noexcept { return pcc ? *pcc : reward_score; }
};

std::optional<double> pearson(std::span<const double> a, std::span<const double> b);
// Average-rank Spearman correlation; empty on zero variance.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

// CE: raw SHAP values in (model, component) order. EE: importance times the
// direction sign; (model, component) pairs without a claim contribute 0.
std::vector<double> causal_effects(const ShapReport& report);
std::vector<double> explanation_effects(const ShapReport& report, const ExplanationClaims& claims);

FaithfulnessResult faithfulness(const ShapReport& report, const ExplanationClaims& claims,
                                const FaithfulnessParams& params = {});

std::vector<UnfaithfulnessPattern> detect_unfaithfulness(const ShapReport& report,
                                                         const ExplanationClaims& claims,
                                                         double tau_low, double tau_high);

// Plain-text analysis block: SHAP values (normalized | raw), the score with
// its three diagnostics, and the unfaithfulness patterns.
std::string render_faithfulness(const ModelShap& shap, const FaithfulnessResult& result,
                                const std::string& excerpt = {},
                                const std::vector<std::string>& component_notes = {});

}  // namespace ej
