#include "ej/orchestrator.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ej/error.h"
#include "ej/shap.h"

namespace ej {

void DecisionPolicy::validate() const {
  if (!(tolerance_coefficient >= 0.0)) {
    fail(ErrorKind::config_error, "tolerance_coefficient must be >= 0");
  }
  if (max_iterations < 1) fail(ErrorKind::config_error, "max_iterations must be >= 1");
}

Decision ground_truth_label(double current_score, double best_score, int iteration,
                            const DecisionPolicy& policy) {
  if (iteration >= policy.max_iterations) return Decision::accept;
  const double delta = current_score - best_score;
  const double tau = policy.tolerance_coefficient * best_score;
  return delta <= tau ? Decision::accept : Decision::continue_;
}

WeightVector apply_refinement(const WeightVector& w_star, std::span<const double> delta,
                              double max_step) {
  if (delta.size() != w_star.size()) {
    fail(ErrorKind::length_mismatch, "refinement delta has the wrong length");
  }
  if (!(max_step >= 0.0)) fail(ErrorKind::invalid_argument, "max_step must be >= 0");
  std::vector<double> v(w_star.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = w_star[i] + std::clamp(delta[i], -max_step, max_step);
  }
  return project_to_simplex(v);
}

void OrchestratorConfig::validate() const {
  if (metric_pool.empty()) fail(ErrorKind::config_error, "metric pool is empty");
  for (std::size_t i = 0; i < metric_pool.size(); ++i) {
    for (std::size_t j = i + 1; j < metric_pool.size(); ++j) {
      if (metric_pool[i] == metric_pool[j]) fail(ErrorKind::config_error, "duplicate metric in pool");
    }
  }
  policy.validate();
  if (!(refinement_max_step >= 0.0)) fail(ErrorKind::config_error, "refinement max_step must be >= 0");
  if (!(faithfulness.tau_low >= 0.0 && faithfulness.tau_low < faithfulness.tau_high)) {
    fail(ErrorKind::config_error, "faithfulness thresholds must satisfy 0 <= tau_low < tau_high");
  }
}

void OrchestrationInput::validate() const {
  if (models.size() < 2) fail(ErrorKind::config_error, "at least two models are required");
  if (folds.empty()) fail(ErrorKind::config_error, "no folds");
  if (series.period < 2) fail(ErrorKind::config_error, "seasonal period must be >= 2");
  require_finite(series.values, "series");
  if (forecasts.size() != folds.size()) {
    fail(ErrorKind::data_error, "forecast bundle does not cover every fold");
  }
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (folds[f].target_end() > series.size()) {
      fail(ErrorKind::data_error, "fold " + std::to_string(f) + " runs past the series end");
    }
    if (forecasts[f].size() != models.size()) {
      fail(ErrorKind::data_error, "fold " + std::to_string(f) + " is missing model forecasts");
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
      if (forecasts[f][m].point.size() != folds[f].horizon) {
        fail(ErrorKind::data_error, "forecast horizon of " + models[m].id + " in fold " +
                                        std::to_string(f) + " does not match the schedule");
      }
    }
  }
}

std::vector<std::string> OrchestrationInput::model_ids() const {
  std::vector<std::string> ids;
  for (const auto& m : models) ids.push_back(m.id);
  return ids;
}

WeightVector OptimizerProposer::propose(const ProposalRequest& request) {
  return optimize_weights(request.truth, *request.forecasts, request.metric, params_, request.mase)
      .weights;
}

std::optional<std::size_t> select_final(const AuditTrail& trail) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < trail.size(); ++i) {
    const auto& r = trail[i];
    if (r.failed() || r.kind != kOptimizationRecord) continue;
    if (!best || r.confidence > trail[*best].confidence) best = i;
  }
  return best;
}

namespace {

struct FoldData {
  std::vector<double> truth;
  ForecastMatrix x;
  MaseContext mase;
};

std::vector<FoldData> fold_data(const OrchestrationInput& in) {
  std::vector<FoldData> out;
  for (std::size_t f = 0; f < in.folds.size(); ++f) {
    const auto& fold = in.folds[f];
    FoldData d;
    const auto begin = in.series.values.begin();
    d.truth.assign(begin + static_cast<std::ptrdiff_t>(fold.target_begin()),
                   begin + static_cast<std::ptrdiff_t>(fold.target_end()));
    d.x.model_ids = in.model_ids();
    d.x.columns = in.forecasts[f];
    d.mase.history.assign(begin, begin + static_cast<std::ptrdiff_t>(fold.train_end));
    d.mase.period = in.series.period;
    out.push_back(std::move(d));
  }
  return out;
}

double cv_score(const std::vector<FoldData>& folds, Metric metric, std::span<const double> w) {
  double total = 0.0;
  for (const auto& d : folds) total += score(metric, d.truth, d.x.combine_forecast(w), &d.mase);
  return total / static_cast<double>(folds.size());
}

// Weights fitted on fold f scored on fold f + 1 (on the same fold when only one exists).
double heldout(const std::vector<FoldData>& folds, const std::vector<WeightVector>& fw,
               Metric metric) {
  if (folds.size() == 1) {
    return score(metric, folds[0].truth, folds[0].x.combine_forecast(fw[0].values()),
                 &folds[0].mase);
  }
  double total = 0.0;
  for (std::size_t f = 0; f + 1 < folds.size(); ++f) {
    const auto& next = folds[f + 1];
    total += score(metric, next.truth, next.x.combine_forecast(fw[f].values()), &next.mase);
  }
  return total / static_cast<double>(folds.size() - 1);
}

std::vector<WeightVector> fit_folds(const std::vector<FoldData>& folds,
                                    const OrchestrationInput& in, int iteration, Metric metric,
                                    WeightProposer& proposer) {
  std::vector<WeightVector> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    ProposalRequest req{iteration, metric, &in.folds[f], folds[f].truth, &folds[f].x,
                        &folds[f].mase};
    auto w = proposer.propose(req);
    if (w.size() != in.models.size()) {
      fail(ErrorKind::invalid_argument, "proposer returned the wrong number of weights");
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

OrchestrationResult run_orchestration(const OrchestrationInput& input,
                                      const OrchestratorConfig& config, Judge& judge,
                                      WeightProposer* proposer) {
  config.validate();
  input.validate();
  OptimizerProposer default_proposer(config.optimizer);
  WeightProposer& propose = proposer ? *proposer : default_proposer;

  const auto folds = fold_data(input);
  const auto ids = input.model_ids();
  const auto m = ids.size();

  OrchestrationResult result;
  result.model_ids = ids;
  result.metric_pool = config.metric_pool;
  result.judge = std::string(judge.name());
  result.deterministic = judge.deterministic();

  // Cross-validated performance table.
  result.cv_performance.assign(m, std::vector<double>(config.metric_pool.size(), 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < config.metric_pool.size(); ++k) {
      double total = 0.0;
      for (const auto& d : folds) {
        total += score(config.metric_pool[k], d.truth, d.x.columns[i], &d.mase);
      }
      result.cv_performance[i][k] = total / static_cast<double>(folds.size());
    }
  }

  // Data features from the history preceding the first forecast window.
  const auto& s = input.series;
  const auto p = static_cast<std::size_t>(s.period);
  const auto first_train = input.folds.front().train_end;
  const auto prefix_len = first_train >= 2 * p ? first_train : s.size();
  const auto feature_decomp =
      decompose(std::span<const double>(s.values.data(), prefix_len), s.period, config.decomposition);
  result.features.seasonal_strength = seasonal_strength(feature_decomp);
  result.features.trend_strength = trend_strength(feature_decomp);
  result.features.period = s.period;
  result.features.cv_window_length = input.folds.back().target_end() - first_train;

  // SHAP target: the full-series decomposition restricted to the last window.
  const auto full_decomp = decompose(s.values, s.period, config.decomposition);
  const auto& last_fold = input.folds.back();
  const auto shap_target = full_decomp.slice(last_fold.target_begin(), last_fold.horizon);

  // Ground-truth reference: best held-out score over the metric strategies.
  {
    OptimizerProposer reference(config.optimizer);
    double best = std::numeric_limits<double>::infinity();
    for (auto metric : config.metric_pool) {
      try {
        const auto fw = fit_folds(folds, input, 0, metric, reference);
        best = std::min(best, heldout(folds, fw, config.evaluation_metric));
      } catch (const Error&) {
      }
    }
    result.best_heldout_score = best;
  }

  Metric metric = config.metric_pool.front();
  for (int k = 1; k <= config.policy.max_iterations; ++k) {
    AuditRecord rec;
    rec.iteration = k;
    rec.metric = metric;
    rec.judge = result.judge;
    try {
      rec.fold_weights = fit_folds(folds, input, k, metric, propose);
      rec.weights = rec.fold_weights.back();
      rec.objective = cv_score(folds, metric, rec.weights.values());
      rec.uniform_objective = cv_score(folds, metric, WeightVector::uniform(m).values());
      rec.heldout_score = heldout(folds, rec.fold_weights, config.evaluation_metric);
      rec.ground_truth =
          ground_truth_label(rec.heldout_score, std::isfinite(result.best_heldout_score)
                                                    ? result.best_heldout_score
                                                    : rec.heldout_score,
                             k, config.policy);

      ShapReport shap;
      shap.metric = config.shap_metric;
      const auto& last = folds.back();
      for (std::size_t i = 0; i < m; ++i) {
        shap.models.push_back(shapley_attribution(ids[i], shap_target, last.x.columns[i],
                                                  config.shap_metric, &last.mase));
      }

      EvaluationContext ctx;
      ctx.dataset = config.dataset;
      ctx.model_ids = ids;
      for (const auto& spec : input.models) ctx.capability_tags.push_back(spec.tags);
      ctx.metric_pool = config.metric_pool;
      ctx.cv_performance = result.cv_performance;
      ctx.current_weights = rec.weights;
      ctx.current_metric = metric;
      ctx.objective = rec.objective;
      ctx.uniform_objective = rec.uniform_objective;
      ctx.features = result.features;
      ctx.iteration = k;
      ctx.max_iterations = config.policy.max_iterations;
      for (const auto& r : result.trail) {
        if (!r.failed()) ctx.history.push_back(r);
      }

      auto verdict = judge.judge(ctx);
      verdict.validate(ctx);
      rec.seasonality_risk = compute_seasonality_risk(ctx);
      rec.confidence = verdict.confidence;
      rec.decision = verdict.decision;
      rec.next_metric = verdict.next_metric;
      rec.claims = verdict.claims;
      rec.aspect_scores = verdict.aspect_scores;
      rec.weight_adjustment = verdict.weight_adjustment;
      rec.judge = verdict.backend.empty() ? result.judge : verdict.backend;
      rec.trigger = verdict.trigger;
      rec.flags = verdict.flags;
      if (verdict.backend == "rule" && result.judge != "rule") result.deterministic = false;
      if (k >= config.policy.max_iterations && rec.decision == Decision::continue_) {
        rec.decision = Decision::accept;
        rec.next_metric.reset();
        rec.flags.emplace_back("forced_accept");
      }

      const auto faith = faithfulness(shap, rec.claims, config.faithfulness);
      rec.faithfulness = faith.signed_score();
      result.shap_reports.push_back({k, std::move(shap)});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::remote_unavailable || e.kind() == ErrorKind::timeout ||
          e.kind() == ErrorKind::config_error) {
        throw;
      }
      rec.error = std::string(to_string(e.kind())) + ": " + e.what();
      if (rec.weights.empty()) rec.weights = WeightVector::uniform(m);
      rec.confidence = 0.0;
      rec.decision = Decision::continue_;
      rec.next_metric = next_metric_in_rotation(config.metric_pool, metric);
      rec.trigger = "error";
    }
    result.trail.push_back(rec);
    if (!rec.failed() && rec.decision == Decision::accept) break;
    if (!rec.next_metric) break;
    metric = *rec.next_metric;
  }

  const auto chosen = select_final(result.trail);
  if (!chosen) fail(ErrorKind::non_finite_objective, "every iteration failed; no weights to select");
  const auto& sel = result.trail[*chosen];
  result.selected_iteration = sel.iteration;
  result.selected_weights = sel.weights;
  result.final_weights = sel.weights;

  if (!sel.weight_adjustment.empty() &&
      std::any_of(sel.weight_adjustment.begin(), sel.weight_adjustment.end(),
                  [](double d) { return d != 0.0; })) {
    AuditRecord ref = sel;
    ref.kind = std::string(kRefinementRecord);
    ref.iteration = result.trail.back().iteration + 1;
    ref.weights = apply_refinement(sel.weights, sel.weight_adjustment, config.refinement_max_step);
    ref.fold_weights.clear();
    ref.objective = cv_score(folds, ref.metric, ref.weights.values());
    ref.heldout_score = score(config.evaluation_metric, folds.back().truth,
                              folds.back().x.combine_forecast(ref.weights.values()),
                              &folds.back().mase);
    ref.decision = Decision::accept;
    ref.next_metric.reset();
    ref.trigger = "refinement";
    ref.flags = {"refines_iteration_" + std::to_string(sel.iteration)};
    result.final_weights = ref.weights;
    result.trail.push_back(std::move(ref));
  }

  result.reflection =
      reflect(result.trail, ids, result.shap_reports, config.faithfulness_floor);
  return result;
}

// ---------------------------------------------------------------- reporting

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(double v) {
  const double pct = 100.0 * v;
  const double rounded = std::round(pct * 10.0) / 10.0;
  return fixed(rounded, rounded == std::round(rounded) ? 0 : 1) + "%";
}

// 84124.3 -> "84,124"; 8.1634 -> "8.16"; 0.0691 -> "0.069".
std::string score_text(double v) {
  if (!std::isfinite(v)) return "n/a";
  if (std::abs(v) >= 1000.0) {
    auto digits = fixed(std::round(std::abs(v)), 0);
    std::string out;
    const int n = static_cast<int>(digits.size());
    for (int i = 0; i < n; ++i) {
      out += digits[static_cast<std::size_t>(i)];
      if ((n - i - 1) % 3 == 0 && i != n - 1) out += ',';
    }
    return v < 0 ? "-" + out : out;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string ratio_text(double r) {
  return r >= 10.0 ? fixed(std::round(r), 0) + "x" : fixed(r, r >= 1.95 ? 0 : 1) + "x";
}

std::string weights_text(const WeightVector& w) {
  std::string out = "[";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ", ";
    out += fixed(w[i], 2);
  }
  return out + "]";
}

std::string named_weights(const WeightVector& w, const std::vector<std::string>& ids) {
  std::string out = "[";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ", ";
    out += ids[i] + ": " + fixed(w[i], 2);
  }
  return out + "]";
}

bool is_uniform(const WeightVector& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (std::abs(w[i] - 1.0 / static_cast<double>(w.size())) > 1e-6) return false;
  }
  return true;
}

std::vector<double> skills(const OrchestrationResult& r) {
  EvaluationContext ctx;
  ctx.model_ids = r.model_ids;
  ctx.metric_pool = r.metric_pool;
  ctx.cv_performance = r.cv_performance;
  return skill_scores(ctx);
}

std::string tag_text(const ModelSpec& spec) {
  std::string out;
  for (const auto& t : spec.tags) {
    if (!out.empty()) out += "+";
    out += t;
  }
  return out;
}

std::vector<const AuditRecord*> optimization_records(const AuditTrail& trail) {
  std::vector<const AuditRecord*> out;
  for (const auto& r : trail) {
    if (r.kind == kOptimizationRecord) out.push_back(&r);
  }
  return out;
}

}  // namespace

nlohmann::json summary_json(const OrchestrationResult& result, const OrchestratorConfig& config) {
  nlohmann::json final_w = nlohmann::json::object();
  nlohmann::json selected_w = nlohmann::json::object();
  for (std::size_t i = 0; i < result.model_ids.size(); ++i) {
    final_w[result.model_ids[i]] = result.final_weights[i];
    selected_w[result.model_ids[i]] = result.selected_weights[i];
  }
  nlohmann::json perf = nlohmann::json::object();
  for (std::size_t i = 0; i < result.model_ids.size(); ++i) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t k = 0; k < result.metric_pool.size(); ++k) {
      row[std::string(to_string(result.metric_pool[k]))] = result.cv_performance[i][k];
    }
    perf[result.model_ids[i]] = std::move(row);
  }
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& r : result.trail) {
    if (r.kind != kOptimizationRecord || r.failed()) continue;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& w : r.fold_weights) rows.push_back(w.vector());
    folds.push_back({{"iteration", r.iteration}, {"metric", to_string(r.metric)}, {"folds", rows}});
  }
  std::size_t optimization_runs = 0;
  for (const auto& r : result.trail) optimization_runs += r.kind == kOptimizationRecord;
  return {{"dataset", config.dataset},
          {"judge", result.judge},
          {"deterministic", result.deterministic},
          {"final_weights", final_w},
          {"selected_weights", selected_w},
          {"selected_iteration", result.selected_iteration},
          {"iterations", optimization_runs},
          {"best_heldout_score", real_to_json(result.best_heldout_score)},
          {"evaluation_metric", to_string(config.evaluation_metric)},
          {"cv_performance", perf},
          {"data_features",
           {{"seasonal_strength", result.features.seasonal_strength},
            {"trend_strength", result.features.trend_strength},
            {"period", result.features.period},
            {"cv_window_length", result.features.cv_window_length}}},
          {"fold_weights", folds},
          {"reflection", result.reflection}};
}

std::string render_markdown(const OrchestrationResult& result, const OrchestrationInput& input,
                            const OrchestratorConfig& config) {
  const auto& ids = result.model_ids;
  const auto q = skills(result);
  const auto records = optimization_records(result.trail);
  const auto& final_w = result.final_weights;
  std::string md;

  md += "# Ensemble Weight Optimization: " + config.dataset + "\n\n";
  md += "**Dataset:** " + config.dataset;
  if (!config.dataset_description.empty()) md += " (" + config.dataset_description + ")";
  md += "  \n**Models:** ";
  for (std::size_t i = 0; i < input.models.size(); ++i) {
    if (i) md += ", ";
    md += input.models[i].id;
    const auto desc = input.models[i].description.empty() ? tag_text(input.models[i])
                                                          : input.models[i].description;
    if (!desc.empty()) md += " (" + desc + ")";
  }
  md += "  \n**Judge:** " + result.judge + "\n\n";

  md += "## Iteration Process\n\n";
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto& r = *records[n];
    const bool last = n + 1 == records.size();
    std::string title;
    if (n == 0) title = !r.failed() && is_uniform(r.weights) ? "Initial Equal Weights" : "Initial Optimization";
    else if (last) title = r.iteration == result.selected_iteration ? "Refined Optimization" : "Metric Validation";
    else title = "Performance-Based Adjustment";
    md += "### Round " + std::to_string(r.iteration) + ": " + title + "\n\n";
    if (r.failed()) {
      md += "- **Metric:** " + upper(to_string(r.metric)) + "\n";
      md += "- **Error:** " + *r.error + "\n";
      md += "- **Decision:** Continue with " +
            (r.next_metric ? upper(to_string(*r.next_metric)) : std::string("-")) +
            " optimization\n\n";
      continue;
    }
    md += "- **Weights:** " + weights_text(r.weights) + " → " + upper(to_string(r.metric)) + ": " +
          score_text(r.objective) + "\n";
    if (!r.claims.free_text.empty()) md += "- **Analysis:** \"" + r.claims.free_text + "\"\n";
    md += "- **Confidence:** " + percent(r.confidence);
    if (r.iteration == result.selected_iteration && records.size() > 1) md += " (best)";
    md += "\n";
    md += "- **Faithfulness:** " + fixed(r.faithfulness, 2) + "\n";
    std::string decision;
    if (r.decision == Decision::continue_) {
      decision = "Continue with " + upper(to_string(*r.next_metric)) + " optimization";
    } else if (r.iteration == result.selected_iteration) {
      decision = r.has_flag("forced_accept") ? "Accept (iteration limit)" : "Accept";
    } else {
      decision = "Use Round " + std::to_string(result.selected_iteration) +
                 " weights (highest confidence)";
    }
    md += "- **Decision:** " + decision + " ✓\n";
    if (!r.flags.empty()) {
      md += "- **Flags:** ";
      for (std::size_t i = 0; i < r.flags.size(); ++i) md += (i ? ", " : "") + r.flags[i];
      md += "\n";
    }
    md += "\n";
  }
  for (const auto& r : result.trail) {
    if (r.kind != kRefinementRecord) continue;
    md += "### Refinement\n\n- **Weights:** " + weights_text(r.weights) + " (adjusted from Round " +
          std::to_string(result.selected_iteration) + ", max step " +
          fixed(config.refinement_max_step, 2) + ")\n\n";
  }

  const AuditRecord* first = nullptr;
  const AuditRecord* selected = nullptr;
  for (const auto* r : records) {
    if (!r->failed() && first == nullptr) first = r;
    if (r->iteration == result.selected_iteration) selected = r;
  }
  md += "## Optimization Journey (" + std::to_string(records.size()) + " iteration" +
        (records.size() == 1 ? "" : "s") + ")\n\n";
  if (first != nullptr) {
    md += std::string("- **Start:** ") + (is_uniform(first->weights) ? "Equal weights " : "Initial weights ") +
          weights_text(first->weights) + " → " + upper(to_string(first->metric)) + ": " +
          score_text(first->objective) + "\n";
  }
  if (selected != nullptr) {
    md += "- **Final:** " + named_weights(final_w, ids) + " → " +
          upper(to_string(selected->metric)) + ": " +
          score_text(cv_score(fold_data(input), selected->metric, final_w.values())) + "\n";
    md += "- **Confidence:** " + percent(selected->confidence) + "\n\n";
  }

  md += "## Key Insights\n\n";
  const auto lead = static_cast<std::size_t>(
      std::max_element(final_w.vector().begin(), final_w.vector().end()) - final_w.vector().begin());
  {
    const auto tags = tag_text(input.models[lead]);
    md += "- **Pattern Discovery:** Identified " + ids[lead] + " as the dominant performer (" +
          percent(final_w[lead]) + " weight)" +
          (tags.empty() ? std::string(".") : " for " + tags + " patterns.") + "\n";
  }
  {
    std::string excluded;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (final_w[i] >= 0.005) continue;
      if (!excluded.empty()) excluded += "; ";
      excluded += "Correctly eliminated " + ids[i] + " (" + percent(final_w[i]) + " weight)";
      if (q[i] > 0.0 && q[i] < 1.0) excluded += " due to " + ratio_text(1.0 / q[i]) + " worse performance";
    }
    md += "- **Model Exclusion:** " +
          (excluded.empty() ? std::string("No model excluded; every member keeps weight") : excluded) +
          ".\n";
  }
  md += "- **Metric Evolution:** " + result.reflection.final_level.metric_progression +
        (records.size() > 1 ? " progression refined weight optimization.\n" : " only.\n");
  {
    const double best_q = *std::max_element(q.begin(), q.end());
    double runner = 0.0;
    bool passed_best = false;
    for (double v : q) {
      if (v == best_q && !passed_best) {
        passed_best = true;
        continue;
      }
      runner = std::max(runner, v);
    }
    const double gap = runner > 0.0 ? best_q / runner : 0.0;
    std::string line;
    if (first != nullptr && is_uniform(first->weights) && first->decision == Decision::continue_) {
      line = "Rejected initial equal weights as suboptimal";
      if (gap >= 1.5) line += " given " + ratio_text(gap) + " performance gaps";
      line += ".";
    } else if (!result.reflection.final_level.sign_disagreements.empty()) {
      line = "Claimed component effects contradicted SHAP signs: " +
             result.reflection.final_level.sign_disagreements.front() + ".";
    } else {
      line = "No anti-pattern detected.";
    }
    md += "- **Anti-Pattern Detection:** " + line + "\n\n";
  }

  md += "## Result Quality\n\n";
  {
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return q[a] > q[b]; });
    std::string ranking;
    for (std::size_t n = 0; n < order.size(); ++n) {
      if (n) ranking += q[order[n - 1]] >= 2.0 * q[order[n]] ? " >> " : " > ";
      ranking += ids[order[n]];
    }
    bool aligned = true;
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = 0; b < ids.size(); ++b) {
        if (q[a] > q[b] + 1e-12 && final_w[a] + 1e-12 < final_w[b]) aligned = false;
      }
    }
    const double fit = selected ? selected->aspect_scores[3] : 0.0;
    bool converged = first != nullptr && selected != nullptr &&
                     (selected->confidence > first->confidence || records.size() == 1);
    bool interpretable = true;
    for (const auto* r : records) {
      if (r->failed() || r->claims.free_text.empty() || r->has_flag("low_fidelity")) interpretable = false;
    }
    auto box = [](bool ok) { return ok ? std::string("- [x] ") : std::string("- [ ] "); };
    md += box(aligned) + "Weights align with performance rankings (" + ranking + ")\n";
    md += box(fit >= 0.5) + "Dataset characteristics match model strengths (trend " +
          fixed(result.features.trend_strength, 3) + ", seasonality " +
          fixed(result.features.seasonal_strength, 3) + ")\n";
    md += box(converged) + "Clear convergence from naive to optimized ensemble";
    if (first && selected) md += " (" + percent(first->confidence) + " → " + percent(selected->confidence) + " confidence)";
    md += "\n";
    md += box(interpretable) + "Interpretable decisions throughout optimization process\n\n";
  }

  md += "## Per-Fold Weights\n\n| Round | Metric | Fold |";
  for (const auto& id : ids) md += " " + id + " |";
  md += "\n|---|---|---|";
  for (std::size_t i = 0; i < ids.size(); ++i) md += "---|";
  md += "\n";
  for (const auto* r : records) {
    if (r->failed()) continue;
    for (std::size_t f = 0; f < r->fold_weights.size(); ++f) {
      md += "| " + std::to_string(r->iteration) + " | " + upper(to_string(r->metric)) + " | " +
            std::to_string(input.folds[f].index) + " |";
      for (std::size_t i = 0; i < ids.size(); ++i) md += " " + fixed(r->fold_weights[f][i], 3) + " |";
      md += "\n";
    }
  }
  md += "\n";

  md += "## Final Assessment\n\n";
  if (selected != nullptr) {
    md += "**Outcome:** Selected Round " + std::to_string(result.selected_iteration) + " weights " +
          named_weights(final_w, ids) + " at " + percent(selected->confidence) +
          " confidence; " + ids[lead] + " leads the ensemble";
    std::size_t n_excluded = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) n_excluded += final_w[i] < 0.005;
    md += n_excluded ? " while underperformers are excluded.\n\n" : ".\n\n";
  }
  const auto& f = result.features;
  md += "**Dataset Fit:** Trend strength " + fixed(f.trend_strength, 3) + ", seasonal strength " +
        fixed(f.seasonal_strength, 3) + ", period " + std::to_string(f.period) + ", CV window " +
        std::to_string(f.cv_window_length) + " samples.\n";
  if (!result.reflection.final_level.sign_disagreements.empty()) {
    md += "\n**Explanation Caveats:**\n";
    for (const auto& d : result.reflection.final_level.sign_disagreements) md += "- " + d + "\n";
  }
  return md;
}

}  // namespace ej
