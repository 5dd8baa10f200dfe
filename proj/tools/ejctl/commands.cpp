#include "commands.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bundle.h"
#include "ej/audit.h"
#include "ej/faithfulness.h"
#include "ej/orchestrator.h"
#include "ej/regime.h"
#include "ej/remote_judge.h"
#include "ej/rewards.h"
#include "ej/selection.h"
#include "ej/shap.h"
#include "ej/simplex.h"

namespace ej::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config_error: return kExitConfig;
    case ErrorKind::data_error:
    case ErrorKind::io_failure:
    case ErrorKind::non_finite_input:
    case ErrorKind::series_too_short:
    case ErrorKind::insufficient_history:
    case ErrorKind::length_mismatch:
    case ErrorKind::missing_quantiles: return kExitData;
    case ErrorKind::remote_unavailable:
    case ErrorKind::timeout:
    case ErrorKind::malformed_verdict: return kExitRemote;
    default: return kExitInternal;
  }
}

LoadedDataset load_dataset(const RunConfig& config, const DatasetConfig& ds) {
  LoadedDataset out;
  out.config = &ds;
  auto series = read_series_csv(config.resolve(ds.series), ds.period, ds.name);
  std::vector<Fold> folds;
  try {
    folds = make_folds(series, ds.n_folds, ds.horizon, ds.step);
  } catch (const Error& e) {
    fail(ErrorKind::data_error, "dataset '" + ds.name + "': " + e.what());
  }
  std::vector<std::string> ids;
  for (const auto& m : config.models) ids.push_back(m.id);
  auto bundle = load_bundle(config.resolve(ds.bundles), ids, folds);
  out.input.series = std::move(series);
  out.input.models = config.models;
  out.input.folds = std::move(folds);
  out.input.forecasts = std::move(bundle.forecasts);
  return out;
}

std::unique_ptr<Judge> make_judge(const JudgeBackendConfig& config) {
  config.validate();
  if (config.kind == BackendKind::remote) {
    return std::make_unique<RemoteJudge>(config, make_http_transport(config));
  }
  return std::make_unique<RuleJudge>(RuleJudgeParams{config.accept_threshold, 1.0});
}

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string judge;
  bool verify = false;
  bool dump_config = false;
  std::string out_dir;
  std::vector<std::string> datasets;
};

struct Context {
  RunConfig config;
  Globals globals;
  fs::path out_root;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  std::vector<const DatasetConfig*> selected() const {
    std::vector<const DatasetConfig*> ds;
    for (const auto& d : config.datasets) {
      if (globals.datasets.empty() ||
          std::find(globals.datasets.begin(), globals.datasets.end(), d.name) !=
              globals.datasets.end()) {
        ds.push_back(&d);
      }
    }
    if (ds.empty()) fail(ErrorKind::config_error, "no dataset matches --dataset");
    return ds;
  }
  fs::path dataset_dir(const DatasetConfig& ds) const { return out_root / ds.name; }
};

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::io_failure, "cannot write " + path.string());
  f << text;
  if (!f) fail(ErrorKind::io_failure, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::data_error, "cannot open " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Runs fn for every selected dataset on up to `jobs` threads. Console output is
// buffered per dataset and flushed in config order; the first failure decides
// the exit status.
template <typename Fn>
int for_each_dataset(const Context& ctx, Fn fn) {
  const auto ds = ctx.selected();
  std::vector<std::string> logs(ds.size());
  std::vector<int> codes(ds.size(), kExitOk);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < ds.size(); i = next++) {
      std::ostringstream log;
      try {
        fn(*ds[i], log);
      } catch (const Error& e) {
        log << "error: " << ds[i]->name << ": " << e.what() << '\n';
        codes[i] = exit_code_for(e.kind());
      } catch (const std::exception& e) {
        log << "error: " << ds[i]->name << ": " << e.what() << '\n';
        codes[i] = kExitInternal;
      }
      logs[i] = log.str();
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(ctx.globals.jobs, 1)), ds.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  int code = kExitOk;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (codes[i] == kExitOk ? *ctx.out : *ctx.err) << logs[i];
    if (code == kExitOk) code = codes[i];
  }
  return code;
}

struct FoldSlice {
  std::vector<double> truth;
  ForecastMatrix x;
  MaseContext mase;
};

std::vector<FoldSlice> fold_slices(const OrchestrationInput& in) {
  std::vector<FoldSlice> out;
  const auto& v = in.series.values;
  for (std::size_t f = 0; f < in.folds.size(); ++f) {
    const auto& fold = in.folds[f];
    FoldSlice s;
    s.truth.assign(v.begin() + static_cast<std::ptrdiff_t>(fold.target_begin()),
                   v.begin() + static_cast<std::ptrdiff_t>(fold.target_end()));
    s.x.model_ids = in.model_ids();
    s.x.columns = in.forecasts[f];
    s.mase.history.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(fold.train_end));
    s.mase.period = in.series.period;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------- optimize

json verify_trail(const AuditTrail& trail, const OrchestrationInput& input) {
  const auto folds = fold_slices(input);
  const auto m = input.models.size();
  json report = {{"checks", 0}, {"discrepancies", json::array()}};
  if (m > 4) {
    report["skipped"] = "brute-force oracle supports at most 4 models";
    return report;
  }
  const double step = m <= 3 ? 0.01 : 0.02;
  report["grid_step"] = step;
  int checks = 0;
  for (const auto& rec : trail) {
    if (rec.kind != kOptimizationRecord || rec.failed()) continue;
    for (std::size_t f = 0; f < rec.fold_weights.size() && f < folds.size(); ++f) {
      const auto& d = folds[f];
      const double got =
          ensemble_objective(d.truth, d.x, rec.metric, rec.fold_weights[f].values(), &d.mase);
      const auto oracle = brute_force_weights(d.truth, d.x, rec.metric, step, &d.mase);
      ++checks;
      // The lattice minimum bounds the continuous minimum from above.
      const double slack = 1e-6 * std::max(1.0, std::abs(oracle.objective));
      if (got > oracle.objective + slack) {
        report["discrepancies"].push_back({{"iteration", rec.iteration},
                                           {"fold", f},
                                           {"metric", to_string(rec.metric)},
                                           {"optimizer", got},
                                           {"oracle", oracle.objective},
                                           {"oracle_weights", oracle.weights.vector()},
                                           {"gap", got - oracle.objective}});
      }
    }
  }
  report["checks"] = checks;
  return report;
}

int cmd_optimize(const Context& ctx) {
  return for_each_dataset(ctx, [&](const DatasetConfig& ds, std::ostream& log) {
    const auto loaded = load_dataset(ctx.config, ds);
    const auto oc = ctx.config.orchestrator(ds);
    auto judge = make_judge(ctx.config.judge);
    const auto result = run_orchestration(loaded.input, oc, *judge);

    const auto dir = ctx.dataset_dir(ds);
    write_text(dir / "audit.jsonl", to_jsonl(result.trail));
    write_text(dir / "summary.json", summary_json(result, oc).dump(2) + "\n");
    write_text(dir / "report.md", render_markdown(result, loaded.input, oc));

    log << ds.name << ": " << result.trail.size() << " records, selected iteration "
        << result.selected_iteration << ", final weights [";
    for (std::size_t i = 0; i < result.final_weights.size(); ++i) {
      log << (i ? ", " : "") << result.model_ids[i] << "=" << fmt(result.final_weights[i]);
    }
    log << "] -> " << dir.string() << '\n';

    if (ctx.globals.verify) {
      auto report = verify_trail(result.trail, loaded.input);
      report["dataset"] = ds.name;
      write_text(dir / "verify.json", report.dump(2) + "\n");
      log << ds.name << ": verify " << report["checks"].get<int>() << " checks, "
          << report["discrepancies"].size() << " discrepancies\n";
    }
  });
}

// ---------------------------------------------------------------- faithfulness

ShapReport dataset_shap(const RunConfig& config, const OrchestrationInput& input) {
  const auto& s = input.series;
  const auto decomp = decompose(s.values, s.period, config.decomposition);
  const auto& fold = input.folds.back();
  const auto target = decomp.slice(fold.target_begin(), fold.horizon);
  MaseContext mase;
  mase.history.assign(s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(fold.train_end));
  mase.period = s.period;
  ShapReport report;
  report.metric = config.shap_metric;
  for (std::size_t i = 0; i < input.models.size(); ++i) {
    report.models.push_back(shapley_attribution(input.models[i].id, target,
                                                input.forecasts.back()[i], config.shap_metric,
                                                &mase));
  }
  return report;
}

json result_json(const FaithfulnessResult& r) {
  json patterns = json::array();
  for (const auto& p : r.patterns) {
    patterns.push_back({{"kind", to_string(p.kind)},
                        {"model", p.model},
                        {"component", to_string(p.component)},
                        {"claimed_importance", p.claimed_importance},
                        {"shap_normalized", p.shap_normalized},
                        {"shap_raw", p.shap_raw},
                        {"description", p.describe()}});
  }
  return {{"pcc", r.pcc ? json(*r.pcc) : json(nullptr)},
          {"reward_score", r.reward_score},
          {"rank_alignment", r.rank_alignment},
          {"magnitude_alignment", r.magnitude_alignment},
          {"pattern_recognition", r.pattern_recognition},
          {"patterns", patterns}};
}

ExplanationClaims load_claims(const fs::path& path) {
  const auto text = read_text(path);
  const auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::config_error, path.string() + " is not valid JSON");
  ExplanationClaims claims;
  try {
    claims = j.get<ExplanationClaims>();
    claims.validate();
  } catch (const json::exception& e) {
    fail(ErrorKind::config_error, path.string() + ": " + e.what());
  } catch (const Error& e) {
    fail(ErrorKind::config_error, path.string() + ": " + e.what());
  }
  return claims;
}

int cmd_faithfulness(const Context& ctx, const std::string& claims_path) {
  const auto claims = load_claims(claims_path);
  return for_each_dataset(ctx, [&](const DatasetConfig& ds, std::ostream& log) {
    const auto loaded = load_dataset(ctx.config, ds);
    const auto report = dataset_shap(ctx.config, loaded.input);
    const auto overall = faithfulness(report, claims, ctx.config.faithfulness);

    json per_model = json::array();
    log << "# " << ds.name << " (" << to_string(report.metric) << ")\n\n";
    for (const auto& ms : report.models) {
      ShapReport single{report.metric, {ms}};
      ExplanationClaims mine;
      mine.free_text = claims.free_text;
      for (const auto& c : claims.claims) {
        if (c.model == ms.model_id) mine.claims.push_back(c);
      }
      const auto r = faithfulness(single, mine, ctx.config.faithfulness);
      log << "## " << ms.model_id << "\n\n" << render_faithfulness(ms, r, claims.free_text) << '\n';
      json shap = {{"model", ms.model_id}, {"error_term", ms.error_term}};
      for (std::size_t c = 0; c < 3; ++c) {
        const auto name = std::string(to_string(static_cast<Component>(c)));
        shap["raw"][name] = ms.raw[c];
        shap["normalized"][name] = ms.normalized[c];
      }
      per_model.push_back({{"shap", shap}, {"result", result_json(r)}});
    }
    log << "Overall faithfulness: " << fmt(overall.reward_score, 2) << " across "
        << report.models.size() << " models, " << overall.patterns.size() << " patterns\n";

    json doc = {{"dataset", ds.name},
                {"metric", to_string(report.metric)},
                {"overall", result_json(overall)},
                {"models", per_model}};
    write_text(ctx.dataset_dir(ds) / "faithfulness.json", doc.dump(2) + "\n");
  });
}

// ---------------------------------------------------------------- regime analysis

int cmd_incompatibility(const Context& ctx) {
  json rows = json::array();
  std::vector<json> per(ctx.selected().size());
  const auto ds_list = ctx.selected();
  const int code = for_each_dataset(ctx, [&](const DatasetConfig& ds, std::ostream&) {
    const auto series = read_series_csv(ctx.config.resolve(ds.series), ds.period, ds.name);
    auto params = ctx.config.incompatibility;
    const double it = incompatibility_index(series, params);
    const int m = static_cast<int>(ctx.config.models.size());
    const auto idx = static_cast<std::size_t>(
        std::find(ds_list.begin(), ds_list.end(), &ds) - ds_list.begin());
    per[idx] = {{"dataset", ds.name},
                {"length", series.size()},
                {"incompatibility", it},
                {"models", m},
                {"omega", ensemble_advantage(it, m, params.kappa)}};
  });
  for (auto& r : per) {
    if (!r.is_null()) rows.push_back(std::move(r));
  }
  *ctx.out << rows.dump(2) << '\n';
  return code;
}

int cmd_theorem_check(const Context& ctx, int seeds, double separation, bool as_json) {
  if (seeds < 1) fail(ErrorKind::config_error, "--seeds must be positive");
  const std::uint64_t base = ctx.globals.seed.value_or(ctx.config.seed);
  auto params = ctx.config.incompatibility;
  std::vector<HarnessReport> reports(static_cast<std::size_t>(seeds));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < seeds; i = next++) {
      auto spec = RegimeSynthesisSpec::two_regime(separation, base + static_cast<std::uint64_t>(i));
      auto p = params;
      p.seed = spec.seed;
      reports[static_cast<std::size_t>(i)] = theorem_harness(spec, p);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min(std::max(ctx.globals.jobs, 1), seeds); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int holds = 0;
  for (const auto& r : reports) holds += r.inequality_holds;
  if (as_json) {
    *ctx.out << json{{"runs", reports}, {"holds", holds}, {"total", seeds}}.dump(2) << '\n';
    return kExitOk;
  }
  *ctx.out << "| seed | regimes | I_T | omega | L_monolithic | L_ensemble | holds |\n"
           << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    *ctx.out << "| " << r.seed << " | " << r.regimes << " | " << fmt(r.incompatibility, 4)
             << " | " << fmt(r.omega, 4) << " | " << fmt(r.loss_monolithic, 5) << " | "
             << fmt(r.loss_ensemble, 5) << " | " << (r.inequality_holds ? "yes" : "no") << " |\n";
  }
  *ctx.out << "\nL_ensemble <= L_monolithic in " << holds << "/" << seeds << " runs\n";
  return kExitOk;
}

// ---------------------------------------------------------------- trajectories

std::string record_prompt(const std::string& dataset, const std::vector<std::string>& ids,
                          const AuditRecord& rec) {
  json w = json::object();
  for (std::size_t i = 0; i < ids.size(); ++i) w[ids[i]] = rec.weights[i];
  return json{{"dataset", dataset},
              {"iteration", rec.iteration},
              {"metric", to_string(rec.metric)},
              {"weights", w},
              {"objective", real_to_json(rec.objective)},
              {"uniform_objective", real_to_json(rec.uniform_objective)}}
      .dump();
}

std::vector<TrajectorySample> generated_samples(const Context& ctx, const DatasetConfig& ds,
                                                std::size_t ds_index, int n_responses) {
  const auto loaded = load_dataset(ctx.config, ds);
  auto judge = make_judge(ctx.config.judge);
  const auto result = run_orchestration(loaded.input, ctx.config.orchestrator(ds), *judge);
  const std::uint64_t seed = ctx.globals.seed.value_or(ctx.config.seed);

  std::vector<TrajectorySample> samples;
  for (const auto& rec : result.trail) {
    if (rec.kind != kOptimizationRecord || rec.failed()) continue;
    TrajectorySample s;
    s.prompt = record_prompt(ds.name, result.model_ids, rec);
    s.ground_truth = rec.ground_truth;
    // Candidates differ in the acceptance threshold they apply to the judge's confidence.
    std::seed_seq seq{seed, static_cast<std::uint64_t>(ds_index),
                      static_cast<std::uint64_t>(rec.iteration)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> threshold(0.5, 0.95);
    for (int r = 0; r < n_responses; ++r) {
      ResponseCandidate c;
      const double t = threshold(rng);
      c.decision = rec.confidence >= t ? Decision::accept : Decision::continue_;
      c.confidence = rec.confidence;
      c.faithfulness = rec.faithfulness;
      json text = {{"decision", to_string(c.decision)}, {"confidence", c.confidence}};
      if (c.decision == Decision::continue_ && rec.next_metric) {
        text["next_metric"] = to_string(*rec.next_metric);
      }
      c.text = text.dump();
      s.responses.push_back(std::move(c));
    }
    label_sample(s, ctx.config.rewards);
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<TrajectorySample> read_responses(const fs::path& path, const RewardConfig& cfg) {
  std::istringstream in(read_text(path));
  std::vector<TrajectorySample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      TrajectorySample s;
      s.prompt = j.at("prompt").get<std::string>();
      s.ground_truth = decision_from_string(j.at("ground_truth").get<std::string>());
      for (const auto& r : j.at("responses")) {
        ResponseCandidate c;
        c.text = r.value("text", std::string());
        c.json_valid = r.value("json_valid", true);
        c.decision = decision_from_string(r.at("decision").get<std::string>());
        c.confidence = r.at("confidence").get<double>();
        c.faithfulness = r.value("faithfulness", 0.0);
        s.responses.push_back(std::move(c));
      }
      label_sample(s, cfg);
      samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      fail(ErrorKind::data_error, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorKind::data_error, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

int cmd_label(const Context& ctx, int n_responses, bool filter, const std::string& responses,
              const std::string& output) {
  if (n_responses < 1) fail(ErrorKind::config_error, "--n-responses must be positive");
  ExportOptions opts;
  opts.filter_faithful = filter;
  if (!responses.empty()) {
    const auto samples = read_responses(responses, ctx.config.rewards);
    const fs::path path = output.empty() ? ctx.out_root / "trajectories.jsonl" : fs::path(output);
    write_text(path, export_trajectories(samples, opts));
    *ctx.out << "labelled " << samples.size() << " samples -> " << path.string() << '\n';
    return kExitOk;
  }
  const auto ds_list = ctx.selected();
  return for_each_dataset(ctx, [&](const DatasetConfig& ds, std::ostream& log) {
    const auto idx = static_cast<std::size_t>(
        std::find(ds_list.begin(), ds_list.end(), &ds) - ds_list.begin());
    const auto samples = generated_samples(ctx, ds, idx, n_responses);
    const auto text = export_trajectories(samples, opts);
    const auto kept = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
    const fs::path path = ctx.dataset_dir(ds) / "trajectories.jsonl";
    write_text(path, text);
    log << ds.name << ": " << samples.size() << " samples, " << kept << " responses kept -> "
        << path.string() << '\n';
  });
}

// ---------------------------------------------------------------- report

struct StoredRun {
  const DatasetConfig* ds = nullptr;
  std::vector<double> final_weights;
  std::vector<WeightVector> fold_weights;
};

StoredRun load_run(const Context& ctx, const DatasetConfig& ds) {
  const auto path = ctx.dataset_dir(ds) / "audit.jsonl";
  if (!fs::exists(path)) {
    fail(ErrorKind::data_error, path.string() + " not found; run `optimize` first");
  }
  AuditTrail trail;
  try {
    trail = read_jsonl(path);
  } catch (const Error& e) {
    fail(ErrorKind::data_error, path.string() + ": " + e.what());
  }
  const auto sel = select_final(trail);
  if (!sel) fail(ErrorKind::data_error, path.string() + " holds no successful record");
  StoredRun run;
  run.ds = &ds;
  run.fold_weights = trail[*sel].fold_weights;
  const auto& last = trail.back();
  run.final_weights = (last.kind == kRefinementRecord ? last.weights : trail[*sel].weights).vector();
  if (run.final_weights.size() != ctx.config.models.size()) {
    fail(ErrorKind::data_error, path.string() + " does not match the configured models");
  }
  return run;
}

int cmd_report(const Context& ctx, const std::string& group_by) {
  std::vector<StoredRun> runs;
  for (const auto* ds : ctx.selected()) runs.push_back(load_run(ctx, *ds));
  const auto m = ctx.config.models.size();

  std::vector<std::string> columns;
  std::vector<std::vector<double>> sums;  // [column][model]
  std::vector<int> counts;
  auto column = [&](const std::string& name) {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it != columns.end()) return static_cast<std::size_t>(it - columns.begin());
    columns.push_back(name);
    sums.emplace_back(m, 0.0);
    counts.push_back(0);
    return columns.size() - 1;
  };
  auto add = [&](std::size_t c, std::span<const double> w) {
    for (std::size_t i = 0; i < m; ++i) sums[c][i] += w[i];
    ++counts[c];
  };

  std::string header;
  if (group_by == "horizon") {
    header = "horizon";
    for (const char* h : {"short", "medium", "long"}) column(h);
    for (const auto& r : runs) add(column(ctx.config.horizon_class(*r.ds)), r.final_weights);
  } else if (group_by == "domain") {
    header = "domain";
    for (const auto& r : runs) {
      add(column(r.ds->domain.empty() ? "unspecified" : r.ds->domain), r.final_weights);
    }
  } else {
    header = "fold";
    for (const auto& r : runs) {
      for (std::size_t f = 0; f < r.fold_weights.size(); ++f) {
        add(column("fold " + std::to_string(f)), r.fold_weights[f].values());
      }
    }
  }

  std::ostringstream md;
  md << "# Mean ensemble weight by " << header << "\n\n| Model |";
  for (const auto& c : columns) md << ' ' << c << " |";
  md << "\n|---|";
  for (std::size_t c = 0; c < columns.size(); ++c) md << "---|";
  md << '\n';
  for (std::size_t i = 0; i < m; ++i) {
    md << "| " << ctx.config.models[i].id << " |";
    for (std::size_t c = 0; c < columns.size(); ++c) {
      md << ' ' << (counts[c] ? fmt(sums[c][i] / counts[c]) : std::string("-")) << " |";
    }
    md << '\n';
  }
  md << "| n |";
  for (auto n : counts) md << ' ' << n << " |";
  md << '\n';

  write_text(ctx.out_root / ("report_by_" + header + ".md"), md.str());
  *ctx.out << md.str();
  return kExitOk;
}

// ---------------------------------------------------------------- selection accuracy

int cmd_evaluate_selection(const Context& ctx) {
  const auto ds_list = ctx.selected();
  std::vector<std::vector<SelectionSample>> per(ds_list.size());
  std::vector<bool> probabilistic(ds_list.size(), true);
  const auto& pool = ctx.config.metric_pool;

  const int code = for_each_dataset(ctx, [&](const DatasetConfig& ds, std::ostream& log) {
    const auto idx = static_cast<std::size_t>(
        std::find(ds_list.begin(), ds_list.end(), &ds) - ds_list.begin());
    const auto loaded = load_dataset(ctx.config, ds);
    auto judge = make_judge(ctx.config.judge);
    const auto oc = ctx.config.orchestrator(ds);
    const auto result = run_orchestration(loaded.input, oc, *judge);
    const auto& chosen = *std::find_if(result.trail.begin(), result.trail.end(), [&](const auto& r) {
      return r.kind == kOptimizationRecord && r.iteration == result.selected_iteration;
    });
    const auto prediction = static_cast<std::size_t>(
        std::find(pool.begin(), pool.end(), chosen.metric) - pool.begin());

    const auto folds = fold_slices(loaded.input);
    bool quantiles = true;
    for (const auto& f : folds) quantiles = quantiles && f.x.has_quantiles();
    probabilistic[idx] = quantiles;
    std::vector<Metric> evals{Metric::mase};
    if (quantiles) evals.push_back(Metric::crps);

    // Weights fitted under each strategy metric on fold f, realized on fold f + 1.
    std::vector<std::vector<WeightVector>> fitted(pool.size());
    for (std::size_t s = 0; s < pool.size(); ++s) {
      for (const auto& f : folds) {
        fitted[s].push_back(optimize_weights(f.truth, f.x, pool[s], ctx.config.optimizer, &f.mase).weights);
      }
    }
    const std::size_t transitions = folds.size() > 1 ? folds.size() - 1 : 1;
    for (std::size_t t = 0; t < transitions; ++t) {
      const auto& target = folds[folds.size() > 1 ? t + 1 : 0];
      SelectionSample sample;
      sample.group = ds.domain.empty() ? ds.name : ds.domain;
      sample.prediction = prediction;
      for (auto e : evals) {
        std::vector<double> losses;
        for (std::size_t s = 0; s < pool.size(); ++s) {
          losses.push_back(score(e, target.truth, target.x.combine_forecast(fitted[s][t].values()),
                                 &target.mase));
        }
        sample.losses.push_back(std::move(losses));
      }
      per[idx].push_back(std::move(sample));
    }
    log << ds.name << ": judge selected " << to_string(chosen.metric) << ", " << transitions
        << " held-out windows\n";
  });
  if (code != kExitOk) return code;

  const bool all_prob = std::all_of(probabilistic.begin(), probabilistic.end(), [](bool b) { return b; });
  std::vector<SelectionSample> samples;
  for (auto& v : per) {
    for (auto& s : v) {
      if (!all_prob) s.losses.resize(1);
      samples.push_back(std::move(s));
    }
  }
  std::vector<std::string> evals{"MASE"};
  if (all_prob) evals.emplace_back("CRPS");
  const auto grid = selection_grid(samples, evals);

  std::ostringstream md;
  md << "| Domain |";
  for (const auto& e : evals) md << ' ' << e << " |";
  md << " n |\n|---|";
  for (std::size_t e = 0; e < evals.size(); ++e) md << "---|";
  md << "---|\n";
  json doc = {{"evaluations", evals}, {"groups", json::array()}};
  for (std::size_t g = 0; g < grid.groups.size(); ++g) {
    md << "| " << grid.groups[g] << " |";
    for (double a : grid.accuracy[g]) md << ' ' << fmt(100.0 * a, 1) << "% |";
    md << ' ' << grid.counts[g] << " |\n";
    doc["groups"].push_back(
        {{"group", grid.groups[g]}, {"accuracy", grid.accuracy[g]}, {"samples", grid.counts[g]}});
  }
  write_text(ctx.out_root / "selection.json", doc.dump(2) + "\n");
  *ctx.out << md.str();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Judge-driven forecast ensemble weighting", "ejctl"};
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "run configuration (JSON)");
  app.add_option("--seed", g.seed, "overrides the configured seed");
  app.add_option("--jobs", g.jobs, "datasets processed concurrently")->check(CLI::PositiveNumber);
  app.add_option("--judge", g.judge, "judge backend")->check(CLI::IsMember({"rule", "remote"}));
  app.add_flag("--verify", g.verify, "cross-check optimizer output against the brute-force oracle");
  app.add_flag("--dump-config", g.dump_config, "print the canonical configuration and exit");
  app.add_option("--out", g.out_dir, "output directory (default: output_dir from the config)");
  app.add_option("--dataset", g.datasets, "restrict to the named dataset(s)");

  auto* optimize = app.add_subcommand("optimize", "run the judge loop and write audit, summary and report");
  auto* faith = app.add_subcommand("faithfulness", "score explanation claims against SHAP attributions");
  std::string claims_path;
  faith->add_option("--claims", claims_path, "claims JSON")->required();
  auto* incompat = app.add_subcommand("incompatibility", "temporal incompatibility index per dataset");
  auto* theorem = app.add_subcommand("theorem-check", "ensemble vs monolithic loss on regime syntheses");
  int seeds = 20;
  double separation = 0.8;
  bool theorem_json = false;
  theorem->add_option("--seeds", seeds, "number of seeded syntheses");
  theorem->add_option("--separation", separation, "AR coefficient magnitude of the two regimes");
  theorem->add_flag("--json", theorem_json, "emit JSON instead of a table");
  auto* label = app.add_subcommand("label-trajectories", "reward-labelled trajectories as JSONL");
  int n_responses = 4;
  bool filter_faithful = false;
  std::string responses_path, label_output;
  label->add_option("--n-responses", n_responses, "candidates per prompt");
  label->add_flag("--filter-faithful", filter_faithful, "drop responses with faithfulness <= 0.8");
  label->add_option("--responses", responses_path, "pre-collected responses (JSONL)");
  label->add_option("--output", label_output, "output file when --responses is given");
  auto* report = app.add_subcommand("report", "mean-weight tables from previous optimize runs");
  std::string group_by = "horizon";
  report->add_option("--group-by", group_by, "grouping")->check(CLI::IsMember({"horizon", "domain", "fold"}));
  auto* selection = app.add_subcommand("evaluate-selection", "metric-selection accuracy grid");
  app.require_subcommand(0, 1);

  std::vector<std::string> argv_store{"ejctl"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const bool needs_config = !theorem->parsed() && !(label->parsed() && !responses_path.empty());
  if (!g.dump_config && app.get_subcommands().empty()) {
    err << app.help();
    return kExitConfig;
  }
  Context ctx;
  ctx.globals = g;
  ctx.out = &out;
  ctx.err = &err;
  try {
    if (!g.config_path.empty()) {
      ctx.config = load_config(g.config_path);
    } else if (needs_config || g.dump_config) {
      fail(ErrorKind::config_error, "--config is required");
    }
    if (g.seed) {
      ctx.config.seed = *g.seed;
      ctx.config.incompatibility.seed = *g.seed;
    }
    if (g.judge == "rule") ctx.config.judge.kind = BackendKind::rule;
    if (g.judge == "remote") ctx.config.judge.kind = BackendKind::remote;
    if (g.dump_config) {
      out << dump_config(ctx.config).dump(2) << '\n';
      return kExitOk;
    }
    ctx.out_root = g.out_dir.empty() ? ctx.config.resolve(ctx.config.output_dir) : fs::path(g.out_dir);

    if (optimize->parsed()) return cmd_optimize(ctx);
    if (faith->parsed()) return cmd_faithfulness(ctx, claims_path);
    if (incompat->parsed()) return cmd_incompatibility(ctx);
    if (theorem->parsed()) return cmd_theorem_check(ctx, seeds, separation, theorem_json);
    if (label->parsed()) return cmd_label(ctx, n_responses, filter_faithful, responses_path, label_output);
    if (report->parsed()) return cmd_report(ctx, group_by);
    if (selection->parsed()) return cmd_evaluate_selection(ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace ej::cli
