#include <gtest/gtest.h>

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "chat_stub.h"
#include "ej/error.h"
#include "ej/remote_judge.h"

using ej::Decision;
using ej::Metric;
using ej::testing::ChatStub;
using ej::testing::ScriptedTransport;
using ej::testing::chat_body;

namespace {

ej::EvaluationContext context() {
  ej::EvaluationContext ctx;
  ctx.dataset = "ETT1/H";
  ctx.model_ids = {"Moirai", "Sundial", "Toto"};
  ctx.capability_tags = {{"seasonal"}, {"trend", "seasonal"}, {}};
  ctx.metric_pool = {Metric::mse, Metric::mae, Metric::smape};
  ctx.cv_performance = {{2, 2, 2}, {1, 1, 1}, {6, 6, 6}};
  ctx.current_weights = ej::WeightVector::uniform(3);
  ctx.objective = 1.0;
  ctx.uniform_objective = 1.0;
  ctx.features = {0.6, 0.5, 24, 240};
  return ctx;
}

ej::JudgeBackendConfig remote_config(const std::string& url = "http://127.0.0.1:9/v1") {
  ej::JudgeBackendConfig c;
  c.kind = ej::BackendKind::remote;
  c.endpoint_url = url;
  c.api_key_env = "EJ_UNIT_JUDGE_KEY";
  c.model_name = "judge-test";
  c.max_retries = 2;
  c.timeout_seconds = 5;
  return c;
}

ej::ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const ej::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no ej::Error thrown";
  return ej::ErrorKind::invalid_argument;
}

}  // namespace

TEST(RemoteChat, ReturnsReplyVerbatim) {
  ScriptedTransport t({{200, chat_body("  hello\n<decision>{}</decision>")}});
  const auto reply = ej::remote_chat({{"user", "hi"}}, remote_config(), t);
  EXPECT_EQ(reply, "  hello\n<decision>{}</decision>");
  const auto req = nlohmann::json::parse(t.bodies.at(0));
  EXPECT_EQ(req["model"], "judge-test");
  EXPECT_EQ(req["messages"][0]["content"], "hi");
}

TEST(RemoteChat, RetriesServerErrorsThenGivesUp) {
  ScriptedTransport t({{500, "boom"}});
  EXPECT_EQ(kind_of([&] { ej::remote_chat({{"user", "x"}}, remote_config(), t); }),
            ej::ErrorKind::remote_unavailable);
  EXPECT_EQ(t.bodies.size(), 3u);  // first try plus max_retries
}

TEST(RemoteChat, RecoversAfterTransientFailure) {
  ScriptedTransport t({{503, ""}, {429, ""}, {200, chat_body("ok")}});
  EXPECT_EQ(ej::remote_chat({{"user", "x"}}, remote_config(), t), "ok");
}

TEST(RemoteChat, ClientErrorsAreNotRetried) {
  ScriptedTransport t({{401, "denied"}});
  EXPECT_THROW(ej::remote_chat({{"user", "x"}}, remote_config(), t), ej::Error);
  EXPECT_EQ(t.bodies.size(), 1u);
}

TEST(VerdictParsing, DemoShape) {
  const auto ctx = context();
  const auto p = ej::parse_verdict(
      R"({"confidence": 0.82, "should_continue": false, "explanation": "Sundial leads"})", ctx);
  EXPECT_DOUBLE_EQ(p.verdict.confidence, 0.82);
  EXPECT_EQ(p.verdict.decision, Decision::accept);
  EXPECT_EQ(p.verdict.claims.free_text, "Sundial leads");
  EXPECT_TRUE(p.low_fidelity);
  EXPECT_EQ(p.verdict.trigger, "verdict");
}

TEST(VerdictParsing, CodeFencesStripped) {
  const auto ctx = context();
  const auto p = ej::parse_verdict(
      "Here you go:\n```json\n{\"confidence\": 0.7, \"decision\": \"continue\", \"next_metric\": \"mae\"}\n```\n",
      ctx);
  EXPECT_EQ(p.verdict.decision, Decision::continue_);
  EXPECT_EQ(p.verdict.next_metric, Metric::mae);
}

TEST(VerdictParsing, ThinkThenDecisionBlock) {
  const auto ctx = context();
  const auto p = ej::parse_verdict(
      "<think>{\"confidence\": 0.1} is a distraction</think>\n<decision>{\"confidence\": 72, "
      "\"decision\": \"accept\", \"aspect_scores\": {\"overall_quality\": 0.9}, "
      "\"weight_adjustment\": {\"Toto\": -0.05, \"Sundial\": 0.05}, \"claims\": [{\"model\": "
      "\"Sundial\", \"component\": \"trend\", \"importance\": 0.8, \"direction\": \"helps\"}]}"
      "</decision>",
      ctx);
  EXPECT_DOUBLE_EQ(p.verdict.confidence, 0.72);
  EXPECT_TRUE(std::find(p.verdict.flags.begin(), p.verdict.flags.end(), "confidence_percent") !=
              p.verdict.flags.end());
  EXPECT_DOUBLE_EQ(p.verdict.aspect_scores[8], 0.9);
  EXPECT_DOUBLE_EQ(p.verdict.aspect_scores[0], 0.72);
  EXPECT_EQ(p.verdict.weight_adjustment, (std::vector<double>{0.0, 0.05, -0.05}));
  EXPECT_FALSE(p.low_fidelity);
}

TEST(VerdictParsing, InvalidNextMetricDefaultsToRotation) {
  const auto ctx = context();
  const auto p = ej::parse_verdict(
      R"({"confidence": 0.5, "decision": "continue", "next_metric": "mape"})", ctx);
  EXPECT_EQ(p.verdict.next_metric, Metric::mae);
  EXPECT_TRUE(std::find(p.verdict.flags.begin(), p.verdict.flags.end(), "next_metric_defaulted") !=
              p.verdict.flags.end());
}

TEST(VerdictParsing, Malformed) {
  const auto ctx = context();
  for (const char* bad : {"no json at all", R"({"decision": "accept"})",
                          R"({"confidence": 0.5})", R"({"confidence": 1.7e3, "decision": "accept"})",
                          R"({"confidence": 0.5, "decision": "accept", "aspect_scores": [1, 2]})"}) {
    EXPECT_EQ(kind_of([&] { ej::parse_verdict(bad, ctx); }), ej::ErrorKind::malformed_verdict) << bad;
  }
}

TEST(RemoteJudge, ThreeTurnExchange) {
  const std::string verdict =
      R"(<think>fine</think><decision>{"confidence": 0.9, "decision": "accept"}</decision>)";
  auto t = std::make_unique<ScriptedTransport>(std::vector<ej::HttpResponse>{
      {200, chat_body("hypothesis")}, {200, chat_body("challenge")}, {200, chat_body(verdict)}});
  auto* raw = t.get();
  ej::RemoteJudge judge(remote_config(), std::move(t));
  const auto v = judge.judge(context());
  EXPECT_EQ(v.decision, Decision::accept);
  EXPECT_EQ(raw->bodies.size(), 3u);
  // system + 3 user turns + 3 replies
  EXPECT_EQ(judge.transcript().size(), 7u);
  EXPECT_FALSE(judge.deterministic());
  const auto last = nlohmann::json::parse(raw->bodies.back());
  EXPECT_EQ(last["messages"].size(), 6u);
}

TEST(RemoteJudge, MalformedRepliesFallBackToRules) {
  auto t = std::make_unique<ScriptedTransport>(std::vector<ej::HttpResponse>{{200, chat_body("no verdict")}});
  auto* raw = t.get();
  ej::RemoteJudge judge(remote_config(), std::move(t));
  const auto v = judge.judge(context());
  EXPECT_EQ(v.backend, "rule");
  EXPECT_TRUE(std::find(v.flags.begin(), v.flags.end(), "malformed_verdict_rule_fallback") != v.flags.end());
  EXPECT_EQ(raw->bodies.size(), 3u + 2u);  // three turns plus two repair requests
}

TEST(RemoteJudge, UnavailableWithoutFallbackThrows) {
  auto cfg = remote_config();
  cfg.allow_rule_fallback = false;
  cfg.max_retries = 0;
  ej::RemoteJudge judge(cfg, std::make_unique<ScriptedTransport>(std::vector<ej::HttpResponse>{{502, ""}}));
  EXPECT_EQ(kind_of([&] { judge.judge(context()); }), ej::ErrorKind::remote_unavailable);

  cfg.allow_rule_fallback = true;
  ej::RemoteJudge lenient(cfg, std::make_unique<ScriptedTransport>(std::vector<ej::HttpResponse>{{502, ""}}));
  const auto v = lenient.judge(context());
  EXPECT_TRUE(std::find(v.flags.begin(), v.flags.end(), "remote_unavailable_rule_fallback") != v.flags.end());
}

TEST(HttpTransport, TalksToLocalServer) {
  ::setenv("EJ_UNIT_JUDGE_KEY", "sk-test", 1);
  ChatStub stub([](int call, const nlohmann::json&) {
    return std::pair{200, chat_body("reply " + std::to_string(call))};
  });
  const auto cfg = remote_config(stub.url());
  auto transport = ej::make_http_transport(cfg);
  EXPECT_EQ(ej::remote_chat({{"user", "a"}}, cfg, *transport), "reply 1");
  EXPECT_EQ(ej::remote_chat({{"user", "b"}}, cfg, *transport), "reply 2");
  EXPECT_EQ(stub.auth_headers().at(0), "Bearer sk-test");
  EXPECT_EQ(stub.requests().at(1)["messages"][0]["content"], "b");
}

TEST(HttpTransport, ConnectionRefusedIsUnavailable) {
  ::setenv("EJ_UNIT_JUDGE_KEY", "sk-test", 1);
  int port = 0;
  {
    ChatStub probe([](int, const nlohmann::json&) { return std::pair{200, std::string()}; });
    port = std::stoi(probe.url().substr(std::string("http://127.0.0.1:").size()));
  }
  auto cfg = remote_config("http://127.0.0.1:" + std::to_string(port) + "/v1");
  cfg.max_retries = 0;
  auto transport = ej::make_http_transport(cfg);
  const auto k = kind_of([&] { ej::remote_chat({{"user", "a"}}, cfg, *transport); });
  EXPECT_TRUE(k == ej::ErrorKind::remote_unavailable || k == ej::ErrorKind::timeout);
}

TEST(HttpTransport, MissingKeyIsConfigError) {
  ::unsetenv("EJ_UNIT_JUDGE_KEY_MISSING");
  auto cfg = remote_config();
  cfg.api_key_env = "EJ_UNIT_JUDGE_KEY_MISSING";
  EXPECT_EQ(kind_of([&] { ej::make_http_transport(cfg); }), ej::ErrorKind::config_error);
  cfg.api_key_env = "EJ_UNIT_JUDGE_KEY";
  cfg.endpoint_url = "localhost:8080";
  ::setenv("EJ_UNIT_JUDGE_KEY", "k", 1);
  EXPECT_EQ(kind_of([&] { ej::make_http_transport(cfg); }), ej::ErrorKind::config_error);
}
