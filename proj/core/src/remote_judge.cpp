#include "ej/remote_judge.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "ej/error.h"

namespace ej {

nlohmann::json chat_request(const std::vector<ChatMessage>& messages,
                            const JudgeBackendConfig& config) {
  auto msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", config.model_name}, {"messages", std::move(msgs)}, {"temperature", 0}};
}

std::string extract_reply(std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::malformed_verdict, "chat response is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::malformed_verdict, "chat response has no choices[0].message.content");
  }
}

std::string remote_chat(const std::vector<ChatMessage>& messages, const JudgeBackendConfig& config,
                        ChatTransport& transport) {
  const auto body = chat_request(messages, config).dump();
  std::string last_error = "no attempt made";
  ErrorKind last_kind = ErrorKind::remote_unavailable;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    try {
      const auto resp = transport.post(body);
      if (resp.status >= 200 && resp.status < 300) return extract_reply(resp.body);
      last_error = "HTTP " + std::to_string(resp.status);
      last_kind = ErrorKind::remote_unavailable;
      if (resp.status < 500 && resp.status != 429 && resp.status != 408) break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::remote_unavailable && e.kind() != ErrorKind::timeout) throw;
      last_error = e.what();
      last_kind = e.kind();
    }
  }
  fail(last_kind, "remote judge failed after " + std::to_string(config.max_retries + 1) +
                      " attempt(s): " + last_error);
}

namespace {

std::string_view strip_fences(std::string_view s) {
  const auto open = s.find("```");
  if (open == std::string_view::npos) return s;
  auto start = s.find('\n', open);
  if (start == std::string_view::npos) return s;
  ++start;
  const auto close = s.find("```", start);
  return s.substr(start, close == std::string_view::npos ? std::string_view::npos : close - start);
}

nlohmann::json parse_object(std::string_view s) {
  auto j = nlohmann::json::parse(s, nullptr, false);
  if (!j.is_discarded() && j.is_object()) return j;
  const auto first = s.find('{');
  const auto last = s.rfind('}');
  if (first != std::string_view::npos && last != std::string_view::npos && last > first) {
    j = nlohmann::json::parse(s.substr(first, last - first + 1), nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
  }
  return nullptr;
}

}  // namespace

nlohmann::json extract_verdict_json(std::string_view reply) {
  std::string_view body = reply;
  const auto open = reply.find("<decision>");
  if (open != std::string_view::npos) {
    const auto start = open + std::string_view("<decision>").size();
    const auto close = reply.find("</decision>", start);
    body = reply.substr(start, close == std::string_view::npos ? std::string_view::npos
                                                                : close - start);
  } else if (const auto think = reply.find("</think>"); think != std::string_view::npos) {
    body = reply.substr(think + std::string_view("</think>").size());
  }
  auto j = parse_object(strip_fences(body));
  if (j.is_null()) j = parse_object(body);
  if (j.is_null()) fail(ErrorKind::malformed_verdict, "reply carries no JSON verdict object");
  return j;
}

ParsedVerdict parse_verdict(std::string_view reply, const EvaluationContext& ctx) {
  const auto j = extract_verdict_json(reply);
  ParsedVerdict out;
  auto& v = out.verdict;
  v.backend = "remote";
  v.trigger = "verdict";
  try {
    // Confidence, accepted either as a fraction or a percentage.
    if (!j.contains("confidence") || !j["confidence"].is_number()) {
      fail(ErrorKind::malformed_verdict, "verdict lacks a numeric confidence");
    }
    double c = j["confidence"].get<double>();
    if (c > 1.0 && c <= 100.0) {
      c /= 100.0;
      v.flags.emplace_back("confidence_percent");
    }
    v.confidence = c;

    if (j.contains("decision") && j["decision"].is_string()) {
      v.decision = decision_from_string(j["decision"].get<std::string>());
    } else if (j.contains("should_continue") && j["should_continue"].is_boolean()) {
      v.decision = j["should_continue"].get<bool>() ? Decision::continue_ : Decision::accept;
    } else {
      fail(ErrorKind::malformed_verdict, "verdict lacks decision/should_continue");
    }

    if (v.decision == Decision::continue_) {
      std::optional<Metric> next;
      if (j.contains("next_metric") && j["next_metric"].is_string()) {
        try {
          next = metric_from_string(j["next_metric"].get<std::string>());
        } catch (const Error&) {
        }
      }
      const bool in_pool =
          next && std::find(ctx.metric_pool.begin(), ctx.metric_pool.end(), *next) !=
                      ctx.metric_pool.end();
      if (!in_pool || *next == ctx.current_metric) {
        next = next_metric_in_rotation(ctx.metric_pool, ctx.current_metric);
        v.flags.emplace_back("next_metric_defaulted");
      }
      v.next_metric = next;
    }

    // Explanation text and structured claims.
    if (j.contains("explanation")) {
      const auto& e = j["explanation"];
      if (e.is_string()) {
        v.claims.free_text = e.get<std::string>();
      } else if (e.is_object()) {
        v.claims.free_text = e.value("free_text", e.value("text", std::string()));
        if (e.contains("claims")) v.claims.claims = e["claims"].get<std::vector<ComponentClaim>>();
      }
    }
    if (j.contains("claims")) {
      const auto& c = j["claims"];
      if (c.is_array()) v.claims.claims = c.get<std::vector<ComponentClaim>>();
      else if (c.is_object()) v.claims.claims = c.at("claims").get<std::vector<ComponentClaim>>();
    }
    if (v.claims.claims.empty()) {
      out.low_fidelity = true;
      v.flags.emplace_back("low_fidelity");
      for (const auto& id : ctx.model_ids) {
        for (auto comp : kComponents) v.claims.claims.push_back({id, comp, 0.5, Direction::neutral});
      }
    }

    v.aspect_scores.fill(v.confidence);
    if (j.contains("aspect_scores")) {
      const auto& a = j["aspect_scores"];
      if (a.is_array() && a.size() == 9) {
        for (std::size_t i = 0; i < 9; ++i) v.aspect_scores[i] = a[i].get<double>();
      } else if (a.is_object()) {
        for (std::size_t i = 0; i < 9; ++i) {
          const std::string key(kAspectNames[i]);
          if (a.contains(key)) v.aspect_scores[i] = a[key].get<double>();
        }
      } else {
        fail(ErrorKind::malformed_verdict, "aspect_scores must be 9 numbers or an object");
      }
    }

    if (j.contains("weight_adjustment") && !j["weight_adjustment"].is_null()) {
      const auto& d = j["weight_adjustment"];
      if (d.is_array()) {
        v.weight_adjustment = d.get<std::vector<double>>();
      } else if (d.is_object()) {
        v.weight_adjustment.assign(ctx.models(), 0.0);
        for (std::size_t i = 0; i < ctx.models(); ++i) {
          if (d.contains(ctx.model_ids[i])) v.weight_adjustment[i] = d[ctx.model_ids[i]].get<double>();
        }
      }
      if (std::all_of(v.weight_adjustment.begin(), v.weight_adjustment.end(),
                      [](double x) { return x == 0.0; })) {
        v.weight_adjustment.clear();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::malformed_verdict, std::string("verdict field has the wrong type: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::malformed_verdict) throw;
    fail(ErrorKind::malformed_verdict, e.what());
  }
  v.validate(ctx);
  return out;
}

std::string verdict_system_prompt() {
  return R"(You judge convex-combination weights for an ensemble of time-series forecasting models.
Evaluate the weights on nine aspects: (1) performance-weight alignment, (2) mathematical
justification, (3) weight distribution patterns, (4) dataset-model matching, (5) model
complementarity, (6) feature reliability, (7) temporal generalization potential,
(8) unexpected patterns, (9) overall ensemble quality.

When asked for the final verdict, reason inside <think>...</think> and then emit exactly one
<decision>{...}</decision> block holding a JSON object with this schema:
{
  "confidence": number in [0, 1],
  "decision": "accept" | "continue",
  "next_metric": "mse" | "rmse" | "mae" | "smape" | "mase" | "crps"  (required when continuing; must differ from the current metric),
  "aspect_scores": [nine numbers in [0, 1], in the order above],
  "claims": [{"model": string, "component": "trend" | "seasonality" | "residual",
              "importance": number in [0, 1], "direction": "helps" | "hurts" | "neutral"}],
  "explanation": string,
  "weight_adjustment": {"<model id>": number, ...}  (optional, small signed shifts)
}
Give a claim for all three components of every model you mention. "helps" means the component
lowers that model's error.)";
}

RemoteJudge::RemoteJudge(JudgeBackendConfig config, std::unique_ptr<ChatTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      rule_(RuleJudgeParams{config_.accept_threshold, 1.0}) {
  if (!transport_) fail(ErrorKind::invalid_argument, "remote judge needs a transport");
  transcript_.push_back({"system", verdict_system_prompt()});
}

std::string RemoteJudge::exchange(std::string user_turn) {
  transcript_.push_back({"user", std::move(user_turn)});
  auto reply = remote_chat(transcript_, config_, *transport_);
  transcript_.push_back({"assistant", reply});
  return reply;
}

JudgeVerdict RemoteJudge::fallback(const EvaluationContext& ctx, std::string flag) {
  auto v = rule_.judge(ctx);
  v.flags.push_back(std::move(flag));
  return v;
}

JudgeVerdict RemoteJudge::judge(const EvaluationContext& ctx) {
  ctx.validate();
  char risk_buf[64];
  const double risk = compute_seasonality_risk(ctx);
  if (std::isinf(risk)) std::snprintf(risk_buf, sizeof risk_buf, "unbounded");
  else std::snprintf(risk_buf, sizeof risk_buf, "%.3f", risk);

  try {
    exchange("Iteration " + std::to_string(ctx.iteration) + " of at most " +
             std::to_string(ctx.max_iterations) + ". Evaluation context:\n" +
             context_to_json(ctx).dump(2) +
             "\n\nState your initial hypothesis about the quality of these weights.");
    exchange(std::string("Challenge: where could these weights fail on future data? "
                         "Seasonality risk is ") +
             risk_buf + ". Consider underweighted models and regime shifts the CV window misses.");
    std::string reply = exchange(
        "Refine your assessment and give the final verdict in the <think>...</think>"
        "<decision>{json}</decision> format.");
    for (int attempt = 0;; ++attempt) {
      try {
        auto parsed = parse_verdict(reply, ctx);
        return std::move(parsed.verdict);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::malformed_verdict) throw;
        if (attempt >= config_.max_retries) return fallback(ctx, "malformed_verdict_rule_fallback");
        reply = exchange(std::string("Your verdict could not be parsed (") + e.what() +
                         "). Reply again with one <decision>{json}</decision> block following "
                         "the schema.");
      }
    }
  } catch (const Error& e) {
    const bool transport_failure =
        e.kind() == ErrorKind::remote_unavailable || e.kind() == ErrorKind::timeout;
    if (transport_failure && config_.allow_rule_fallback) {
      return fallback(ctx, "remote_unavailable_rule_fallback");
    }
    if (e.kind() == ErrorKind::malformed_verdict) {
      // The chat envelope itself was unusable.
      if (config_.allow_rule_fallback) return fallback(ctx, "malformed_verdict_rule_fallback");
      fail(ErrorKind::remote_unavailable, e.what());
    }
    throw;
  }
}

}  // namespace ej
