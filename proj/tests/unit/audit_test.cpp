#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "ej/audit.h"
#include "ej/error.h"

using ej::Decision;

namespace {

ej::AuditRecord sample_record() {
  ej::AuditRecord r;
  r.iteration = 2;
  r.weights = ej::WeightVector({0.28, 0.72, 0.0});
  r.fold_weights = {ej::WeightVector({0.3, 0.7, 0.0}), r.weights};
  r.metric = ej::Metric::mae;
  r.objective = 0.1 + 0.2;  // not representable in short decimal form
  r.uniform_objective = 1.0 / 3.0;
  r.heldout_score = std::numeric_limits<double>::infinity();
  r.confidence = 0.7;
  r.faithfulness = -0.25;
  r.seasonality_risk = std::numeric_limits<double>::infinity();
  r.decision = Decision::continue_;
  r.next_metric = ej::Metric::smape;
  r.ground_truth = Decision::accept;
  r.claims.claims = {{"Sundial", ej::Component::trend, 0.6, ej::Direction::helps}};
  r.claims.free_text = "Sundial's trend";
  r.aspect_scores = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  r.weight_adjustment = {0.03, -0.03, 0.0};
  r.judge = "remote";
  r.trigger = "verdict";
  r.flags = {"low_fidelity"};
  return r;
}

void expect_same(const ej::AuditRecord& a, const ej::AuditRecord& b) {
  EXPECT_EQ(a.iteration, b.iteration);
  EXPECT_EQ(a.kind, b.kind);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.fold_weights, b.fold_weights);
  EXPECT_EQ(a.metric, b.metric);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.uniform_objective, b.uniform_objective);
  EXPECT_EQ(a.heldout_score, b.heldout_score);
  EXPECT_EQ(a.confidence, b.confidence);
  EXPECT_EQ(a.faithfulness, b.faithfulness);
  EXPECT_EQ(a.seasonality_risk, b.seasonality_risk);
  EXPECT_EQ(a.decision, b.decision);
  EXPECT_EQ(a.next_metric, b.next_metric);
  EXPECT_EQ(a.ground_truth, b.ground_truth);
  EXPECT_EQ(a.claims, b.claims);
  EXPECT_EQ(a.aspect_scores, b.aspect_scores);
  EXPECT_EQ(a.weight_adjustment, b.weight_adjustment);
  EXPECT_EQ(a.judge, b.judge);
  EXPECT_EQ(a.trigger, b.trigger);
  EXPECT_EQ(a.flags, b.flags);
  EXPECT_EQ(a.error, b.error);
}

}  // namespace

TEST(Audit, RecordRoundTripsLosslessly) {
  const auto r = sample_record();
  const nlohmann::json j = r;
  const auto back = j.get<ej::AuditRecord>();
  expect_same(r, back);
  EXPECT_EQ(j["seasonality_risk"], "inf");
  EXPECT_TRUE(r.has_flag("low_fidelity"));
  EXPECT_FALSE(r.failed());
}

TEST(Audit, JsonlRoundTrip) {
  ej::AuditTrail trail{sample_record(), sample_record()};
  trail[1].iteration = 3;
  trail[1].kind = std::string(ej::kRefinementRecord);
  trail[1].next_metric.reset();
  trail[1].error = "non_finite_objective: boom";
  const auto text = ej::to_jsonl(trail);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  const auto back = ej::parse_jsonl(text);
  ASSERT_EQ(back.size(), 2u);
  expect_same(trail[0], back[0]);
  expect_same(trail[1], back[1]);
  EXPECT_TRUE(back[1].failed());
  // serialization is a pure function of the trail
  EXPECT_EQ(ej::to_jsonl(back), text);

  const auto path = std::filesystem::temp_directory_path() / "ej_audit_test.jsonl";
  ej::write_jsonl(path, trail);
  EXPECT_EQ(ej::to_jsonl(ej::read_jsonl(path)), text);
}

TEST(Audit, RandomizedRoundTrip) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    auto r = sample_record();
    r.objective = std::ldexp(u(rng), static_cast<int>(rng() % 80) - 40);
    r.confidence = u(rng);
    r.faithfulness = 2 * u(rng) - 1;
    r.heldout_score = u(rng) * 1e6;
    const double a = u(rng);
    r.weights = ej::WeightVector({a, 1.0 - a, 0.0});
    const auto back = ej::parse_jsonl(ej::to_jsonl({r}));
    expect_same(r, back.at(0));
  }
}

TEST(Audit, RealEncodingOfNonFinite) {
  EXPECT_EQ(ej::real_to_json(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_TRUE(std::isnan(ej::real_from_json("nan")));
  EXPECT_EQ(ej::real_from_json(1.5), 1.5);
}

TEST(Audit, MalformedInput) {
  EXPECT_THROW(ej::parse_jsonl("{\"iteration\": 1}\nnot json\n"), ej::Error);
  EXPECT_THROW(ej::read_jsonl("/nonexistent/audit.jsonl"), ej::Error);
  EXPECT_EQ(ej::decision_from_string("continue"), Decision::continue_);
  EXPECT_THROW(ej::decision_from_string("maybe"), ej::Error);
}
