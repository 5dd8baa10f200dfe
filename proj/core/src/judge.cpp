#include "ej/judge.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ej/error.h"

namespace ej {

void EvaluationContext::validate() const {
  const auto m = model_ids.size();
  if (m == 0) fail(ErrorKind::invalid_argument, "evaluation context has no models");
  if (metric_pool.empty()) fail(ErrorKind::invalid_argument, "metric pool is empty");
  if (cv_performance.size() != m) {
    fail(ErrorKind::invalid_argument, "cv_performance must have one row per model");
  }
  for (const auto& row : cv_performance) {
    if (row.size() != metric_pool.size()) {
      fail(ErrorKind::invalid_argument, "cv_performance is incomplete over the metric pool");
    }
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0) {
        fail(ErrorKind::invalid_argument, "cv_performance entries must be finite and >= 0");
      }
    }
  }
  if (current_weights.size() != m) {
    fail(ErrorKind::invalid_argument, "current weights do not match the model count");
  }
  if (!capability_tags.empty() && capability_tags.size() != m) {
    fail(ErrorKind::invalid_argument, "capability tags must be given per model");
  }
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(features.seasonal_strength) || !in01(features.trend_strength)) {
    fail(ErrorKind::invalid_argument, "component strengths must lie in [0, 1]");
  }
  if (iteration < 1 || max_iterations < 1) {
    fail(ErrorKind::invalid_argument, "iteration counters must be >= 1");
  }
}

bool EvaluationContext::has_tag(std::size_t model, std::string_view tag) const {
  if (model >= capability_tags.size()) return false;
  for (const auto& t : capability_tags[model]) {
    if (t.find(tag) != std::string::npos) return true;
  }
  return false;
}

nlohmann::json context_to_json(const EvaluationContext& ctx) {
  nlohmann::json perf = nlohmann::json::object();
  for (std::size_t m = 0; m < ctx.models(); ++m) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t k = 0; k < ctx.metric_pool.size(); ++k) {
      row[std::string(to_string(ctx.metric_pool[k]))] = ctx.cv_performance[m][k];
    }
    perf[ctx.model_ids[m]] = std::move(row);
  }
  nlohmann::json weights = nlohmann::json::object();
  nlohmann::json tags = nlohmann::json::object();
  for (std::size_t m = 0; m < ctx.models(); ++m) {
    weights[ctx.model_ids[m]] = ctx.current_weights[m];
    tags[ctx.model_ids[m]] =
        m < ctx.capability_tags.size() ? ctx.capability_tags[m] : std::vector<std::string>{};
  }
  std::vector<std::string> pool;
  for (auto metric : ctx.metric_pool) pool.emplace_back(to_string(metric));
  nlohmann::json history = nlohmann::json::array();
  for (const auto& r : ctx.history) {
    history.push_back({{"iteration", r.iteration},
                       {"metric", to_string(r.metric)},
                       {"weights", r.weights.vector()},
                       {"confidence", r.confidence},
                       {"decision", to_string(r.decision)}});
  }
  return {{"dataset", ctx.dataset},
          {"iteration", ctx.iteration},
          {"max_iterations", ctx.max_iterations},
          {"metric_pool", pool},
          {"current_metric", to_string(ctx.current_metric)},
          {"current_weights", weights},
          {"objective", real_to_json(ctx.objective)},
          {"uniform_objective", real_to_json(ctx.uniform_objective)},
          {"cv_performance", perf},
          {"data_features",
           {{"seasonal_strength", ctx.features.seasonal_strength},
            {"trend_strength", ctx.features.trend_strength},
            {"period", ctx.features.period},
            {"cv_window_length", ctx.features.cv_window_length},
            {"seasonality_risk", real_to_json(compute_seasonality_risk(ctx))}}},
          {"domain_knowledge", tags},
          {"history", history}};
}

void JudgeVerdict::validate(const EvaluationContext& ctx) const {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    fail(ErrorKind::malformed_verdict, "confidence outside [0, 1]");
  }
  if (decision == Decision::continue_) {
    if (!next_metric) fail(ErrorKind::malformed_verdict, "continue without a next metric");
    if (std::find(ctx.metric_pool.begin(), ctx.metric_pool.end(), *next_metric) ==
        ctx.metric_pool.end()) {
      fail(ErrorKind::malformed_verdict, "next metric is not in the configured pool");
    }
  }
  for (double a : aspect_scores) {
    if (!(a >= 0.0 && a <= 1.0)) fail(ErrorKind::malformed_verdict, "aspect score outside [0, 1]");
  }
  if (!weight_adjustment.empty() && weight_adjustment.size() != ctx.models()) {
    fail(ErrorKind::malformed_verdict, "weight adjustment has the wrong length");
  }
  for (double d : weight_adjustment) {
    if (!std::isfinite(d)) fail(ErrorKind::malformed_verdict, "weight adjustment is not finite");
  }
  try {
    claims.validate();
  } catch (const Error& e) {
    fail(ErrorKind::malformed_verdict, e.what());
  }
}

std::vector<double> skill_scores(const EvaluationContext& ctx) {
  const auto m = ctx.models();
  std::vector<double> q(m, 0.0);
  for (std::size_t k = 0; k < ctx.metric_pool.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) best = std::min(best, ctx.cv_performance[i][k]);
    for (std::size_t i = 0; i < m; ++i) {
      const double s = ctx.cv_performance[i][k];
      q[i] += s > 0.0 ? best / s : 1.0;
    }
  }
  for (auto& v : q) v /= static_cast<double>(ctx.metric_pool.size());
  return q;
}

double compute_seasonality_risk(const EvaluationContext& ctx) {
  const auto& f = ctx.features;
  const bool short_window = f.cv_window_length < 2 * static_cast<std::size_t>(std::max(f.period, 0));
  if (!short_window || f.seasonal_strength <= 0.0) return 0.0;
  double seasonal_weight = 0.0;
  for (std::size_t m = 0; m < ctx.models(); ++m) {
    if (ctx.has_tag(m, "seasonal")) seasonal_weight += ctx.current_weights[m];
  }
  if (seasonal_weight < 1e-9) return std::numeric_limits<double>::infinity();
  return f.seasonal_strength / seasonal_weight;
}

namespace {

// Performance dominance of the best model: 1 - mean skill of the others.
double dominance(const std::vector<double>& q) {
  if (q.size() < 2) return 0.0;
  const auto best = static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
  double others = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i != best) others += q[i];
  }
  return std::clamp(1.0 - others / static_cast<double>(q.size() - 1), 0.0, 1.0);
}

double concordance(const WeightVector& w, const std::vector<double>& q) {
  double score = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = i + 1; j < q.size(); ++j) {
      const double dq = q[i] - q[j];
      if (std::abs(dq) <= 1e-12) continue;
      ++pairs;
      const double dw = w[i] - w[j];
      if (std::abs(dw) <= 1e-12) score += 0.5;
      else if (dw * dq > 0.0) score += 1.0;
    }
  }
  return pairs == 0 ? 0.5 : score / pairs;
}

double normalized_entropy(const WeightVector& w) {
  if (w.size() < 2) return 1.0;
  return w.entropy() / std::log(static_cast<double>(w.size()));
}

}  // namespace

RubricScores rule_rubric(const EvaluationContext& ctx) {
  ctx.validate();
  const auto m = ctx.models();
  const auto& w = ctx.current_weights;
  const auto q = skill_scores(ctx);
  const double dp = dominance(q);
  RubricScores out;
  auto& a = out.aspects;

  // Align: rank concordance, weighted skill, and concentration vs dominance.
  a[0] = concordance(w, q);
  {
    const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
    double wq = 0.0;
    for (std::size_t i = 0; i < m; ++i) wq += w[i] * q[i];
    a[1] = (*hi - *lo) > 1e-12 ? (wq - *lo) / (*hi - *lo) : 0.5;
  }
  {
    const double dw = 1.0 - normalized_entropy(w);
    const double evidence = std::min(1.0, 2.0 * dp);
    const double match = 1.0 - std::min(1.0, 2.0 * std::abs(dp - dw));
    a[2] = 0.5 + evidence * (match - 0.5);
  }

  // Match: tagged weight vs component strength, tag coverage, CV reliability.
  {
    double sum = 0.0;
    int classes = 0;
    const std::array<std::pair<const char*, double>, 2> kinds = {
        std::pair{"seasonal", ctx.features.seasonal_strength},
        std::pair{"trend", ctx.features.trend_strength}};
    for (const auto& [tag, strength] : kinds) {
      double tagged = 0.0;
      bool any = false;
      for (std::size_t i = 0; i < m; ++i) {
        if (ctx.has_tag(i, tag)) {
          any = true;
          tagged += w[i];
        }
      }
      if (!any) continue;
      sum += 1.0 - std::abs(std::min(1.0, tagged) - strength);
      ++classes;
    }
    a[3] = classes ? sum / classes : 0.5;
  }
  {
    std::vector<std::string> wanted, covered;
    for (std::size_t i = 0; i < m && i < ctx.capability_tags.size(); ++i) {
      for (const auto& t : ctx.capability_tags[i]) {
        if (q[i] > 0.5 && std::find(wanted.begin(), wanted.end(), t) == wanted.end()) {
          wanted.push_back(t);
        }
        if (w[i] > 0.05 && std::find(covered.begin(), covered.end(), t) == covered.end()) {
          covered.push_back(t);
        }
      }
    }
    if (wanted.empty()) {
      a[4] = 0.5;
    } else {
      int hit = 0;
      for (const auto& t : wanted) hit += std::find(covered.begin(), covered.end(), t) != covered.end();
      a[4] = static_cast<double>(hit) / static_cast<double>(wanted.size());
    }
  }
  {
    const double p = std::max(ctx.features.period, 1);
    const double coverage =
        std::min(1.0, static_cast<double>(ctx.features.cv_window_length) / (2.0 * p));
    a[5] = 0.5 + coverage * std::min(1.0, 2.0 * dp) * (a[0] - 0.5);
  }

  // Future: regime risk or stability, weight on weak models, overall quality.
  {
    const double risk = compute_seasonality_risk(ctx);
    double signal = 0.0;
    if (risk > 0.0) {
      signal = -std::min(1.0, risk);
    } else if (!ctx.history.empty() && ctx.history.back().weights.size() == m) {
      const auto& prev = ctx.history.back().weights;
      double l1 = 0.0;
      for (std::size_t i = 0; i < m; ++i) l1 += std::abs(w[i] - prev[i]);
      signal = 0.5 * (1.0 - 0.5 * l1);
    }
    a[6] = 0.5 + 0.5 * signal;
  }
  {
    double weak = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < m; ++i) {
      if (q[i] <= 0.5) {
        any = true;
        weak += w[i];
      }
    }
    a[7] = any ? 1.0 - std::min(1.0, 2.0 * weak) : 0.5;
  }
  {
    const double mean8 = std::accumulate(a.begin(), a.begin() + 8, 0.0) / 8.0;
    double improvement = 0.0;
    if (ctx.uniform_objective > 0.0 && std::isfinite(ctx.objective)) {
      improvement = std::clamp((ctx.uniform_objective - ctx.objective) / ctx.uniform_objective,
                               0.0, 1.0);
    }
    a[8] = 0.5 * mean8 + 0.5 * (0.5 + 0.5 * improvement);
  }
  for (auto& v : a) v = std::clamp(v, 0.0, 1.0);
  out.confidence = std::accumulate(a.begin(), a.end(), 0.0) / 9.0;
  return out;
}

Metric next_metric_in_rotation(const std::vector<Metric>& pool, Metric current) {
  if (pool.empty()) fail(ErrorKind::invalid_argument, "metric pool is empty");
  static constexpr std::array<Metric, 6> kOrder = {Metric::mse,   Metric::rmse, Metric::mae,
                                                   Metric::smape, Metric::mase, Metric::crps};
  std::vector<Metric> ordered;
  for (auto m : kOrder) {
    if (std::find(pool.begin(), pool.end(), m) != pool.end()) ordered.push_back(m);
  }
  const auto it = std::find(ordered.begin(), ordered.end(), current);
  if (it == ordered.end()) return ordered.front();
  const auto next = std::next(it);
  return next == ordered.end() ? ordered.front() : *next;
}

ExplanationClaims derive_claims(const EvaluationContext& ctx) {
  const double ts = ctx.features.trend_strength;
  const double ss = ctx.features.seasonal_strength;
  const double rs = std::max(0.0, 1.0 - std::max(ts, ss));
  ExplanationClaims out;
  for (const auto& id : ctx.model_ids) {
    out.claims.push_back({id, Component::trend, ts, ts >= 0.1 ? Direction::helps : Direction::neutral});
    out.claims.push_back(
        {id, Component::seasonality, ss, ss >= 0.1 ? Direction::helps : Direction::neutral});
    out.claims.push_back({id, Component::residual, rs, rs >= 0.1 ? Direction::hurts : Direction::neutral});
  }
  return out;
}

namespace {

std::string format_ratio(double r) {
  char buf[32];
  if (r >= 10.0) std::snprintf(buf, sizeof buf, "%.0fx", r);
  else std::snprintf(buf, sizeof buf, "%.1fx", r);
  return buf;
}

std::string rule_explanation(const EvaluationContext& ctx, const RubricScores& rubric,
                             double risk) {
  const auto q = skill_scores(ctx);
  const auto m = ctx.models();
  const auto best = static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
  double runner_up = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i != best) runner_up = std::max(runner_up, q[i]);
  }
  const double lead = runner_up > 0.0 ? q[best] / runner_up : 0.0;
  const auto& w = ctx.current_weights;
  const bool uniform = normalized_entropy(w) > 1.0 - 1e-9;
  std::string text;
  if (uniform && lead >= 1.5) {
    text = "Equal weights ignore " + ctx.model_ids[best] + "'s " + format_ratio(lead) +
           " better performance.";
  } else if (rubric.aspects[0] >= 0.99) {
    text = "Weights follow the CV performance ranking with " + ctx.model_ids[best] + " leading.";
  } else {
    text = "Weights only partly follow the CV performance ranking.";
  }
  if (std::isinf(risk)) {
    text += " No weight on seasonal models although the CV window is shorter than two periods.";
  } else if (risk > 1.0) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " Seasonality risk %.2f: seasonal models underweighted.", risk);
    text += buf;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (w[i] < 0.005 && q[i] > 0.0 && q[i] <= 0.5) {
      text += " " + ctx.model_ids[i] + " excluded (" + format_ratio(1.0 / q[i]) + " worse).";
    }
  }
  return text;
}

}  // namespace

JudgeVerdict RuleJudge::judge(const EvaluationContext& ctx) {
  const auto rubric = rule_rubric(ctx);
  const double risk = compute_seasonality_risk(ctx);
  JudgeVerdict v;
  v.backend = "rule";
  v.aspect_scores = rubric.aspects;
  v.confidence = rubric.confidence;
  v.claims = derive_claims(ctx);
  v.claims.free_text = rule_explanation(ctx, rubric, risk);

  const bool single_metric = ctx.metric_pool.size() == 1;
  if (ctx.iteration >= ctx.max_iterations) {
    v.decision = Decision::accept;
    v.trigger = "max_iterations";
  } else if (single_metric) {
    v.decision = Decision::accept;
    v.trigger = "single_metric_pool";
  } else if (risk > params_.risk_threshold) {
    v.decision = Decision::continue_;
    v.trigger = "seasonality_risk";
  } else if (v.confidence >= params_.accept_threshold) {
    v.decision = Decision::accept;
    v.trigger = "confidence_threshold";
  } else {
    v.decision = Decision::continue_;
    v.trigger = "below_threshold";
  }
  if (v.decision == Decision::continue_) {
    v.next_metric = next_metric_in_rotation(ctx.metric_pool, ctx.current_metric);
  }
  return v;
}

void JudgeBackendConfig::validate() const {
  if (kind == BackendKind::remote) {
    if (endpoint_url.empty()) fail(ErrorKind::config_error, "remote judge needs endpoint_url");
    if (api_key_env.empty()) fail(ErrorKind::config_error, "remote judge needs api_key_env");
  }
  if (max_retries < 0) fail(ErrorKind::config_error, "max_retries must be >= 0");
  if (!(timeout_seconds > 0.0)) fail(ErrorKind::config_error, "timeout must be positive");
  if (!(accept_threshold >= 0.0 && accept_threshold <= 1.0)) {
    fail(ErrorKind::config_error, "accept_threshold must lie in [0, 1]");
  }
}

}  // namespace ej
