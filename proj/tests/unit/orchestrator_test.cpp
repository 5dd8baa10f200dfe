#include <gtest/gtest.h>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "ej/error.h"
#include "ej/orchestrator.h"
#include "synthetic.h"

using ej::Decision;
using ej::testing::ScriptedJudge;
using ej::testing::ScriptedVerdict;
using ej::testing::synthetic_input;

namespace {

ej::OrchestratorConfig config() {
  ej::OrchestratorConfig c;
  c.dataset = "synthetic";
  return c;
}

// Counts proposals so trail completeness can be checked against optimizer runs.
class CountingProposer final : public ej::WeightProposer {
 public:
  ej::WeightVector propose(const ej::ProposalRequest& r) override {
    ++calls;
    iterations.push_back(r.iteration);
    return inner.propose(r);
  }
  ej::OptimizerProposer inner;
  int calls = 0;
  std::vector<int> iterations;
};

}  // namespace

TEST(GroundTruth, PolicyTable) {
  const double best = 2.0;
  for (double rel : {-0.1, 0.0, 5e-4, 1e-3, 2e-3, 0.05}) {
    for (int k = 1; k <= 3; ++k) {
      const auto d = ej::ground_truth_label(best + rel * best, best, k);
      const bool accept = rel * best <= 0.001 * best || k >= 3;
      EXPECT_EQ(d, accept ? Decision::accept : Decision::continue_) << rel << " " << k;
    }
  }
}

TEST(GroundTruth, MarginalGapAcceptedAtIterationLimit) {
  EXPECT_EQ(ej::ground_truth_label(0.0231 + 0.0003, 0.0231, 3), Decision::accept);
  EXPECT_EQ(ej::ground_truth_label(0.0231 + 0.0003, 0.0231, 1), Decision::continue_);
  ej::DecisionPolicy p{0.02, 5};
  EXPECT_EQ(ej::ground_truth_label(1.01, 1.0, 1, p), Decision::accept);
  EXPECT_EQ(ej::ground_truth_label(1.05, 1.0, 4, p), Decision::continue_);
}

TEST(Refinement, ClipThenProject) {
  const ej::WeightVector w({0.5, 0.5});
  EXPECT_EQ(ej::apply_refinement(w, std::vector<double>{0.0, 0.0}), w);
  const auto r = ej::apply_refinement(w, std::vector<double>{0.3, -0.3}, 0.2);
  EXPECT_NEAR(r[0], 0.7, 1e-12);
  EXPECT_NEAR(r[1], 0.3, 1e-12);
  const auto p = ej::apply_refinement(ej::WeightVector({0.1, 0.9}), std::vector<double>{-0.2, 0.0}, 0.2);
  EXPECT_GE(p[0], 0.0);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
}

TEST(Orchestrator, ImmediateAccept) {
  const auto in = synthetic_input(1);
  ScriptedJudge judge({{0.9, Decision::accept}});
  const auto r = ej::run_orchestration(in, config(), judge);
  ASSERT_EQ(r.trail.size(), 1u);
  EXPECT_EQ(r.final_weights, r.trail[0].weights);
  EXPECT_EQ(r.selected_iteration, 1);
  EXPECT_EQ(r.trail[0].fold_weights.size(), in.folds.size());
  EXPECT_EQ(r.trail[0].weights, r.trail[0].fold_weights.back());
}

TEST(Orchestrator, ArgmaxConfidenceSelectsRoundTwo) {
  const auto in = synthetic_input(2);
  ScriptedJudge judge({{0.60, Decision::continue_}, {0.87, Decision::continue_}, {0.82, Decision::accept}});
  const auto cfg = config();
  const auto r = ej::run_orchestration(in, cfg, judge);
  ASSERT_EQ(r.trail.size(), 3u);
  EXPECT_EQ(r.selected_iteration, 2);
  EXPECT_EQ(r.final_weights, r.trail[1].weights);
  EXPECT_EQ(*ej::select_final(r.trail), 1u);
  const auto md = ej::render_markdown(r, in, cfg);
  EXPECT_NE(md.find("Use Round 2 weights (highest confidence)"), std::string::npos) << md;
  // metrics follow the rotation mse -> mae -> smape
  EXPECT_EQ(r.trail[0].metric, ej::Metric::mse);
  EXPECT_EQ(r.trail[1].metric, ej::Metric::mae);
  EXPECT_EQ(r.trail[2].metric, ej::Metric::smape);
}

TEST(Orchestrator, ConfidenceTiePrefersEarliest) {
  const auto in = synthetic_input(3);
  ScriptedJudge judge({{0.8, Decision::continue_}, {0.8, Decision::accept}});
  const auto r = ej::run_orchestration(in, config(), judge);
  EXPECT_EQ(r.selected_iteration, 1);
}

TEST(Orchestrator, AlwaysContinueForcesAcceptAtLimit) {
  const auto in = synthetic_input(4);
  ScriptedJudge judge({{0.5, Decision::continue_}});
  CountingProposer proposer;
  const auto r = ej::run_orchestration(in, config(), judge, &proposer);
  ASSERT_EQ(r.trail.size(), 3u);
  EXPECT_EQ(r.trail.back().decision, Decision::accept);
  EXPECT_TRUE(r.trail.back().has_flag("forced_accept"));
  // one proposal per fold per iteration, nothing else
  EXPECT_EQ(proposer.calls, 3 * static_cast<int>(in.folds.size()));
  EXPECT_EQ(std::count(proposer.iterations.begin(), proposer.iterations.end(), 2),
            static_cast<long>(in.folds.size()));
}

TEST(Orchestrator, RefinementAppendsRecord) {
  const auto in = synthetic_input(5);
  ScriptedJudge judge({{0.9, Decision::accept, {0.1, -0.05, -0.05}}});
  const auto cfg = config();
  const auto r = ej::run_orchestration(in, cfg, judge);
  ASSERT_EQ(r.trail.size(), 2u);
  const auto& ref = r.trail.back();
  EXPECT_EQ(ref.kind, ej::kRefinementRecord);
  EXPECT_EQ(ref.iteration, 2);
  EXPECT_EQ(r.final_weights, ej::apply_refinement(r.trail[0].weights, r.trail[0].weight_adjustment, 0.2));
  EXPECT_EQ(r.selected_weights, r.trail[0].weights);
  EXPECT_EQ(r.final_weights, ref.weights);
  const auto summary = ej::summary_json(r, cfg);
  EXPECT_EQ(summary["iterations"], 1);
}

TEST(Orchestrator, DeterministicWithRuleJudge) {
  const auto in = synthetic_input(6);
  ej::RuleJudge a, b;
  const auto r1 = ej::run_orchestration(in, config(), a);
  const auto r2 = ej::run_orchestration(in, config(), b);
  EXPECT_EQ(ej::to_jsonl(r1.trail), ej::to_jsonl(r2.trail));
  EXPECT_TRUE(r1.deterministic);
  EXPECT_EQ(ej::summary_json(r1, config()).dump(), ej::summary_json(r2, config()).dump());
}

TEST(Orchestrator, ProposerFailureIsRecorded) {
  class Flaky final : public ej::WeightProposer {
   public:
    ej::WeightVector propose(const ej::ProposalRequest& r) override {
      if (r.iteration == 2) ej::fail(ej::ErrorKind::non_finite_objective, "diverged");
      return inner.propose(r);
    }
    ej::OptimizerProposer inner;
  } flaky;
  const auto in = synthetic_input(7);
  ScriptedJudge judge({{0.5, Decision::continue_}});
  const auto r = ej::run_orchestration(in, config(), judge, &flaky);
  ASSERT_EQ(r.trail.size(), 3u);
  EXPECT_TRUE(r.trail[1].failed());
  EXPECT_NE(r.trail[1].error->find("diverged"), std::string::npos);
  EXPECT_EQ(r.trail[2].metric, ej::Metric::smape);
  EXPECT_NE(r.selected_iteration, 2);
}

TEST(Orchestrator, ContextCarriesHistoryAndFeatures) {
  const auto in = synthetic_input(8);
  ScriptedJudge judge({{0.5, Decision::continue_}});
  ej::run_orchestration(in, config(), judge);
  ASSERT_EQ(judge.contexts.size(), 3u);
  EXPECT_TRUE(judge.contexts[0].history.empty());
  EXPECT_EQ(judge.contexts[2].history.size(), 2u);
  const auto& f = judge.contexts[0].features;
  EXPECT_EQ(f.period, 6);
  EXPECT_EQ(f.cv_window_length, 3u * 6u);
  EXPECT_GT(f.seasonal_strength, 0.5);
  // the accurate member leads on every metric
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_LT(judge.contexts[0].cv_performance[0][k], judge.contexts[0].cv_performance[1][k]);
  }
}

TEST(Orchestrator, MarkdownSections) {
  const auto in = synthetic_input(9);
  ej::RuleJudge judge;
  const auto cfg = config();
  const auto r = ej::run_orchestration(in, cfg, judge);
  const auto md = ej::render_markdown(r, in, cfg);
  std::size_t pos = 0;
  for (const char* h : {"## Iteration Process", "### Round 1:", "## Optimization Journey",
                        "## Key Insights", "## Result Quality", "## Per-Fold Weights",
                        "## Final Assessment"}) {
    const auto at = md.find(h, pos);
    ASSERT_NE(at, std::string::npos) << h;
    pos = at;
  }
}

TEST(Orchestrator, InputValidation) {
  auto in = synthetic_input(10);
  in.forecasts.pop_back();
  ej::RuleJudge judge;
  EXPECT_THROW(ej::run_orchestration(in, config(), judge), ej::Error);
  auto cfg = config();
  cfg.metric_pool.clear();
  EXPECT_THROW(ej::run_orchestration(synthetic_input(10), cfg, judge), ej::Error);
  auto one = synthetic_input(10);
  one.models.resize(1);
  for (auto& row : one.forecasts) row.resize(1);
  EXPECT_THROW(ej::run_orchestration(one, config(), judge), ej::Error);
}

TEST(Orchestrator, ProbabilisticPoolRuns) {
  const auto in = synthetic_input(11, 6, 3, true);
  auto cfg = config();
  cfg.metric_pool = {ej::Metric::mse, ej::Metric::mase, ej::Metric::crps};
  ScriptedJudge judge({{0.5, Decision::continue_}});
  const auto r = ej::run_orchestration(in, cfg, judge);
  ASSERT_EQ(r.trail.size(), 3u);
  for (const auto& rec : r.trail) EXPECT_FALSE(rec.failed()) << *rec.error;
  EXPECT_EQ(r.trail[2].metric, ej::Metric::crps);
}
