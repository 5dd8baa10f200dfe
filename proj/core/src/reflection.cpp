#include "ej/reflection.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "ej/error.h"
#include "ej/judge.h"

namespace ej {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f%%", 100.0 * v);
  return buf;
}

std::string justify(const AuditRecord& r) {
  if (r.failed()) return "Iteration failed (" + *r.error + "); moved on to the next metric.";
  char buf[160];
  std::snprintf(buf, sizeof buf, "confidence %.3f", r.confidence);
  std::string conf = buf;
  if (r.kind == kRefinementRecord) return "Refinement applied to the selected weights.";
  if (r.has_flag("forced_accept") || r.trigger == "max_iterations") {
    return "Accepted because the iteration limit was reached (" + conf + ").";
  }
  if (r.trigger == "single_metric_pool") return "Accepted: the metric pool has a single entry.";
  if (r.trigger == "seasonality_risk") {
    std::snprintf(buf, sizeof buf, "Continued: seasonality risk %s exceeds 1.",
                  std::isinf(r.seasonality_risk) ? "inf" : std::to_string(r.seasonality_risk).c_str());
    return buf;
  }
  if (r.trigger == "confidence_threshold") return "Accepted: " + conf + " reached the threshold.";
  if (r.trigger == "below_threshold") {
    return "Continued: " + conf + " below the acceptance threshold; next metric " +
           (r.next_metric ? upper(to_string(*r.next_metric)) : std::string("none")) + ".";
  }
  std::string s = r.decision == Decision::accept ? "Judge accepted" : "Judge continued";
  s += " (" + conf + ")";
  if (r.next_metric) s += "; next metric " + upper(to_string(*r.next_metric));
  if (!r.claims.free_text.empty()) s += ": " + r.claims.free_text;
  return s;
}

}  // namespace

Reflection reflect(const AuditTrail& trail, const std::vector<std::string>& model_ids,
                   const std::vector<IterationShap>& shap, double faithfulness_floor) {
  if (trail.empty()) fail(ErrorKind::invalid_argument, "cannot reflect on an empty trail");
  Reflection out;
  std::map<int, const ShapReport*> by_iteration;
  for (const auto& s : shap) by_iteration[s.iteration] = &s.report;

  for (const auto& r : trail) {
    IterationReflection it;
    it.iteration = r.iteration;
    it.metric = r.metric;
    it.aspects = r.aspect_scores;
    it.confidence = r.confidence;
    it.faithfulness = r.faithfulness;
    it.failed = r.failed();
    it.below_floor = !r.failed() && r.faithfulness < faithfulness_floor;
    if (it.failed) {
      it.note = "failed: " + *r.error;
    } else {
      const auto weakest = static_cast<std::size_t>(
          std::min_element(r.aspect_scores.begin(), r.aspect_scores.end()) -
          r.aspect_scores.begin());
      const auto strongest = static_cast<std::size_t>(
          std::max_element(r.aspect_scores.begin(), r.aspect_scores.end()) -
          r.aspect_scores.begin());
      char buf[256];
      std::snprintf(buf, sizeof buf, "strongest aspect %s (%.2f), weakest %s (%.2f)",
                    std::string(kAspectNames[strongest]).c_str(), r.aspect_scores[strongest],
                    std::string(kAspectNames[weakest]).c_str(), r.aspect_scores[weakest]);
      it.note = buf;
      if (it.below_floor) {
        std::snprintf(buf, sizeof buf, "; faithfulness %.2f below floor %.2f", r.faithfulness,
                      faithfulness_floor);
        it.note += buf;
      }
    }
    out.iteration_level.push_back(std::move(it));
    out.decision_level.push_back({r.iteration, r.decision, justify(r)});
  }

  auto& fin = out.final_level;
  fin.model_ids = model_ids;
  fin.mean_weights.assign(model_ids.size(), 0.0);
  int counted = 0;
  std::vector<bool> always_zero(model_ids.size(), true);
  std::string progression;
  for (const auto& r : trail) {
    if (r.failed() || r.kind != kOptimizationRecord || r.weights.size() != model_ids.size()) continue;
    ++counted;
    for (std::size_t m = 0; m < model_ids.size(); ++m) {
      fin.mean_weights[m] += r.weights[m];
      if (r.weights[m] >= 0.005) always_zero[m] = false;
    }
  }
  for (const auto& r : trail) {
    if (r.kind != kOptimizationRecord) continue;
    if (!progression.empty()) progression += " → ";
    progression += upper(to_string(r.metric));
  }
  fin.metric_progression = progression;
  if (counted > 0) {
    for (auto& w : fin.mean_weights) w /= counted;
    for (std::size_t m = 0; m < model_ids.size(); ++m) {
      if (always_zero[m]) {
        fin.exclusions.push_back("Correctly eliminated " + model_ids[m] + " (" +
                                 percent(fin.mean_weights[m]) + " weight)");
      }
    }
  }

  // Claimed direction vs SHAP sign, counted per (model, component).
  std::map<std::pair<std::string, int>, std::pair<int, int>> tally;  // disagreements, checks
  for (const auto& r : trail) {
    if (r.failed()) continue;
    const auto it = by_iteration.find(r.iteration);
    if (it == by_iteration.end()) continue;
    for (const auto& claim : r.claims.claims) {
      if (claim.direction == Direction::neutral) continue;
      const auto* ms = it->second->find(claim.model);
      if (ms == nullptr) continue;
      const double raw = ms->raw_of(claim.component);
      if (raw == 0.0) continue;
      auto& t = tally[{claim.model, static_cast<int>(claim.component)}];
      ++t.second;
      const bool disagrees = (claim.direction == Direction::helps) != (raw < 0.0);
      if (disagrees) ++t.first;
    }
  }
  for (const auto& [key, t] : tally) {
    if (t.first > 0 && 2 * t.first >= t.second) {
      fin.sign_disagreements.push_back(
          key.first + " " + std::string(to_string(static_cast<Component>(key.second))) +
          ": claimed direction contradicts the SHAP sign in " + std::to_string(t.first) + "/" +
          std::to_string(t.second) + " records");
    }
  }

  if (counted > 0) {
    const auto lead = static_cast<std::size_t>(
        std::max_element(fin.mean_weights.begin(), fin.mean_weights.end()) -
        fin.mean_weights.begin());
    fin.summary = model_ids[lead] + " carries the largest mean weight (" +
                  percent(fin.mean_weights[lead]) + ") across " + std::to_string(counted) +
                  " record(s); metrics explored: " + progression + ".";
  } else {
    fin.summary = "No successful optimization record; metrics attempted: " + progression + ".";
  }
  if (trail.size() == 1 && !trail.front().failed()) {
    fin.summary += " Single record: " + out.decision_level.front().justification;
  }
  return out;
}

void to_json(nlohmann::json& j, const Reflection& r) {
  auto iters = nlohmann::json::array();
  for (const auto& it : r.iteration_level) {
    iters.push_back({{"iteration", it.iteration},
                     {"metric", to_string(it.metric)},
                     {"aspect_scores", it.aspects},
                     {"confidence", it.confidence},
                     {"faithfulness", real_to_json(it.faithfulness)},
                     {"below_faithfulness_floor", it.below_floor},
                     {"failed", it.failed},
                     {"note", it.note}});
  }
  auto decisions = nlohmann::json::array();
  for (const auto& d : r.decision_level) {
    decisions.push_back({{"iteration", d.iteration},
                         {"decision", to_string(d.decision)},
                         {"justification", d.justification}});
  }
  nlohmann::json mean = nlohmann::json::object();
  for (std::size_t i = 0; i < r.final_level.model_ids.size(); ++i) {
    mean[r.final_level.model_ids[i]] = r.final_level.mean_weights[i];
  }
  j = {{"iteration_level", iters},
       {"decision_level", decisions},
       {"final_level",
        {{"mean_weights", mean},
         {"exclusions", r.final_level.exclusions},
         {"sign_disagreements", r.final_level.sign_disagreements},
         {"metric_progression", r.final_level.metric_progression},
         {"summary", r.final_level.summary}}}};
}

}  // namespace ej
