#include "config.h"

#include <fstream>
#include <set>

#include "ej/error.h"

namespace ej::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { fail(ErrorKind::config_error, msg); }

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) bad("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return j[key].get<T>();
}

Metric metric_field(const json& j, const char* key, Metric fallback) {
  if (!j.contains(key)) return fallback;
  return metric_from_string(j[key].get<std::string>());
}

DatasetConfig parse_dataset(const json& j, std::size_t index) {
  const std::string where = "datasets[" + std::to_string(index) + "]";
  reject_unknown(j,
                 {"name", "description", "domain", "horizon_class", "series", "bundles", "period",
                  "folds", "horizon", "step"},
                 where);
  DatasetConfig d;
  d.name = get_or<std::string>(j, "name", "dataset" + std::to_string(index));
  d.description = get_or<std::string>(j, "description", "");
  d.domain = get_or<std::string>(j, "domain", "");
  d.horizon_class = get_or<std::string>(j, "horizon_class", "");
  if (!j.contains("series")) bad(where + " needs a series path");
  d.series = j["series"].get<std::string>();
  d.bundles = get_or<std::string>(j, "bundles", "bundles");
  d.period = get_or<int>(j, "period", 24);
  d.n_folds = get_or<int>(j, "folds", 5);
  d.horizon = get_or<std::size_t>(j, "horizon", 24);
  d.step = get_or<std::size_t>(j, "step", 0);
  return d;
}

}  // namespace

void RunConfig::validate() const {
  if (datasets.empty()) bad("no datasets configured");
  std::set<std::string> names;
  for (const auto& d : datasets) {
    if (d.name.empty()) bad("dataset name is empty");
    if (!names.insert(d.name).second) bad("duplicate dataset name '" + d.name + "'");
    if (d.period < 2) bad("dataset '" + d.name + "': period must be >= 2");
    if (d.n_folds < 1) bad("dataset '" + d.name + "': folds must be >= 1");
    if (d.horizon == 0) bad("dataset '" + d.name + "': horizon must be positive");
    if (!d.horizon_class.empty() && d.horizon_class != "short" && d.horizon_class != "medium" &&
        d.horizon_class != "long") {
      bad("dataset '" + d.name + "': horizon_class must be short, medium or long");
    }
  }
  if (models.size() < 2) bad("at least two models are required");
  std::set<std::string> ids;
  for (const auto& m : models) {
    if (m.id.empty()) bad("model id is empty");
    if (!ids.insert(m.id).second) bad("duplicate model id '" + m.id + "'");
  }
  if (metric_pool.empty()) bad("metric pool is empty");
  if (optimizer.max_iterations <= 0 || !(optimizer.step_tolerance > 0.0) ||
      !(optimizer.objective_tolerance > 0.0)) {
    bad("optimizer parameters must be positive");
  }
  try {
    judge.validate();
    policy.validate();
    incompatibility.validate();
    rewards.validate();
    orchestrator(datasets.front()).validate();
  } catch (const Error& e) {
    bad(e.what());
  }
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

OrchestratorConfig RunConfig::orchestrator(const DatasetConfig& ds) const {
  OrchestratorConfig c;
  c.dataset = ds.name;
  c.dataset_description = ds.description;
  c.metric_pool = metric_pool;
  c.optimizer = optimizer;
  c.policy = policy;
  c.refinement_max_step = refinement_max_step;
  c.faithfulness_floor = faithfulness_floor;
  c.shap_metric = shap_metric;
  c.evaluation_metric = evaluation_metric;
  c.faithfulness = faithfulness;
  c.decomposition = decomposition;
  return c;
}

std::string RunConfig::horizon_class(const DatasetConfig& ds) const {
  if (!ds.horizon_class.empty()) return ds.horizon_class;
  const auto ratio = static_cast<double>(ds.horizon) / ds.period;
  if (ratio <= 1.0) return "short";
  if (ratio <= 4.0) return "medium";
  return "long";
}

RunConfig parse_config(const json& j, std::filesystem::path base_dir) {
  if (!j.is_object()) bad("config must be a JSON object");
  reject_unknown(j,
                 {"datasets", "models", "metric_pool", "judge", "optimizer", "policy",
                  "refinement_max_step", "faithfulness", "shap_metric", "evaluation_metric",
                  "decomposition", "incompatibility", "rewards", "output_dir", "seed"},
                 "config");
  RunConfig c;
  c.base_dir = std::move(base_dir);
  try {
    if (!j.contains("datasets") || !j["datasets"].is_array()) bad("config needs a datasets array");
    for (std::size_t i = 0; i < j["datasets"].size(); ++i) {
      c.datasets.push_back(parse_dataset(j["datasets"][i], i));
    }
    if (!j.contains("models") || !j["models"].is_array()) bad("config needs a models array");
    for (const auto& m : j["models"]) {
      reject_unknown(m, {"id", "tags", "description"}, "models");
      c.models.push_back({m.at("id").get<std::string>(),
                          get_or<std::vector<std::string>>(m, "tags", {}),
                          get_or<std::string>(m, "description", "")});
    }
    if (j.contains("metric_pool")) {
      c.metric_pool.clear();
      for (const auto& m : j["metric_pool"]) c.metric_pool.push_back(metric_from_string(m.get<std::string>()));
    }
    if (j.contains("judge")) {
      const auto& jj = j["judge"];
      reject_unknown(jj,
                     {"kind", "endpoint_url", "api_key_env", "model", "max_retries",
                      "timeout_seconds", "accept_threshold", "allow_rule_fallback"},
                     "judge");
      const auto kind = get_or<std::string>(jj, "kind", "rule");
      if (kind == "rule") c.judge.kind = BackendKind::rule;
      else if (kind == "remote") c.judge.kind = BackendKind::remote;
      else bad("judge.kind must be rule or remote");
      c.judge.endpoint_url = get_or<std::string>(jj, "endpoint_url", "");
      c.judge.api_key_env = get_or<std::string>(jj, "api_key_env", "");
      c.judge.model_name = get_or<std::string>(jj, "model", "");
      c.judge.max_retries = get_or<int>(jj, "max_retries", 2);
      c.judge.timeout_seconds = get_or<double>(jj, "timeout_seconds", 60.0);
      c.judge.accept_threshold = get_or<double>(jj, "accept_threshold", 0.85);
      c.judge.allow_rule_fallback = get_or<bool>(jj, "allow_rule_fallback", true);
    }
    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      reject_unknown(o, {"max_iterations", "step_tolerance", "objective_tolerance"}, "optimizer");
      c.optimizer.max_iterations = get_or<int>(o, "max_iterations", 100);
      c.optimizer.step_tolerance = get_or<double>(o, "step_tolerance", 1e-8);
      c.optimizer.objective_tolerance = get_or<double>(o, "objective_tolerance", 1e-10);
    }
    if (j.contains("policy")) {
      const auto& p = j["policy"];
      reject_unknown(p, {"tolerance_coefficient", "max_iterations"}, "policy");
      c.policy.tolerance_coefficient = get_or<double>(p, "tolerance_coefficient", 0.001);
      c.policy.max_iterations = get_or<int>(p, "max_iterations", 3);
    }
    c.refinement_max_step = get_or<double>(j, "refinement_max_step", 0.2);
    if (j.contains("faithfulness")) {
      const auto& f = j["faithfulness"];
      reject_unknown(f, {"tau_low", "tau_high", "floor"}, "faithfulness");
      c.faithfulness.tau_low = get_or<double>(f, "tau_low", 0.1);
      c.faithfulness.tau_high = get_or<double>(f, "tau_high", 0.4);
      c.faithfulness_floor = get_or<double>(f, "floor", 0.5);
    }
    c.shap_metric = metric_field(j, "shap_metric", Metric::mae);
    c.evaluation_metric = metric_field(j, "evaluation_metric", Metric::mae);
    if (j.contains("decomposition")) {
      const auto& d = j["decomposition"];
      reject_unknown(d,
                     {"seasonal_window", "seasonal_degree", "trend_window", "lowpass_window",
                      "inner_iterations", "robust_iterations"},
                     "decomposition");
      c.decomposition.seasonal_window = get_or<int>(d, "seasonal_window", 0);
      c.decomposition.seasonal_degree = get_or<int>(d, "seasonal_degree", 0);
      c.decomposition.trend_window = get_or<int>(d, "trend_window", 0);
      c.decomposition.lowpass_window = get_or<int>(d, "lowpass_window", 0);
      c.decomposition.inner_iterations = get_or<int>(d, "inner_iterations", 2);
      c.decomposition.robust_iterations = get_or<int>(d, "robust_iterations", 1);
    }
    if (j.contains("incompatibility")) {
      const auto& i = j["incompatibility"];
      reject_unknown(i, {"delta", "epsilon", "window_length", "kappa", "normalize", "max_pairs"},
                     "incompatibility");
      c.incompatibility.delta = get_or<double>(i, "delta", 1.0);
      c.incompatibility.epsilon = get_or<double>(i, "epsilon", 0.5);
      c.incompatibility.window_length = get_or<int>(i, "window_length", 8);
      c.incompatibility.kappa = get_or<double>(i, "kappa", 1.0);
      c.incompatibility.normalize = get_or<bool>(i, "normalize", true);
      c.incompatibility.max_pairs = get_or<std::size_t>(i, "max_pairs", 200000);
    }
    if (j.contains("rewards")) {
      const auto& r = j["rewards"];
      reject_unknown(r,
                     {"alpha", "beta", "confidence_pivot", "clip_low", "clip_high", "gamma",
                      "delta", "kl_coefficient"},
                     "rewards");
      c.rewards.alpha = get_or<double>(r, "alpha", 0.2);
      c.rewards.beta = get_or<double>(r, "beta", 0.1);
      c.rewards.confidence_pivot = get_or<double>(r, "confidence_pivot", 0.5);
      c.rewards.clip_low = get_or<double>(r, "clip_low", 0.0);
      c.rewards.clip_high = get_or<double>(r, "clip_high", 1.0);
      c.rewards.gamma = get_or<double>(r, "gamma", 0.15);
      c.rewards.delta = get_or<double>(r, "delta", 0.05);
      c.rewards.kl_coefficient = get_or<double>(r, "kl_coefficient", 1e-3);
    }
    c.output_dir = get_or<std::string>(j, "output_dir", "out");
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
  } catch (const json::exception& e) {
    bad(std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config_error) throw;
    bad(e.what());
  }
  c.incompatibility.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file " + path.string());
  const auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) bad("config file " + path.string() + " is not valid JSON");
  auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(j, base);
}

json dump_config(const RunConfig& c) {
  json datasets = json::array();
  for (const auto& d : c.datasets) {
    datasets.push_back({{"name", d.name},
                        {"description", d.description},
                        {"domain", d.domain},
                        {"horizon_class", d.horizon_class},
                        {"series", d.series.generic_string()},
                        {"bundles", d.bundles.generic_string()},
                        {"period", d.period},
                        {"folds", d.n_folds},
                        {"horizon", d.horizon},
                        {"step", d.step}});
  }
  json models = json::array();
  for (const auto& m : c.models) {
    models.push_back({{"id", m.id}, {"tags", m.tags}, {"description", m.description}});
  }
  std::vector<std::string> pool;
  for (auto m : c.metric_pool) pool.emplace_back(to_string(m));
  return {{"datasets", datasets},
          {"models", models},
          {"metric_pool", pool},
          {"judge",
           {{"kind", c.judge.kind == BackendKind::rule ? "rule" : "remote"},
            {"endpoint_url", c.judge.endpoint_url},
            {"api_key_env", c.judge.api_key_env},
            {"model", c.judge.model_name},
            {"max_retries", c.judge.max_retries},
            {"timeout_seconds", c.judge.timeout_seconds},
            {"accept_threshold", c.judge.accept_threshold},
            {"allow_rule_fallback", c.judge.allow_rule_fallback}}},
          {"optimizer",
           {{"max_iterations", c.optimizer.max_iterations},
            {"step_tolerance", c.optimizer.step_tolerance},
            {"objective_tolerance", c.optimizer.objective_tolerance}}},
          {"policy",
           {{"tolerance_coefficient", c.policy.tolerance_coefficient},
            {"max_iterations", c.policy.max_iterations}}},
          {"refinement_max_step", c.refinement_max_step},
          {"faithfulness",
           {{"tau_low", c.faithfulness.tau_low},
            {"tau_high", c.faithfulness.tau_high},
            {"floor", c.faithfulness_floor}}},
          {"shap_metric", to_string(c.shap_metric)},
          {"evaluation_metric", to_string(c.evaluation_metric)},
          {"decomposition",
           {{"seasonal_window", c.decomposition.seasonal_window},
            {"seasonal_degree", c.decomposition.seasonal_degree},
            {"trend_window", c.decomposition.trend_window},
            {"lowpass_window", c.decomposition.lowpass_window},
            {"inner_iterations", c.decomposition.inner_iterations},
            {"robust_iterations", c.decomposition.robust_iterations}}},
          {"incompatibility",
           {{"delta", c.incompatibility.delta},
            {"epsilon", c.incompatibility.epsilon},
            {"window_length", c.incompatibility.window_length},
            {"kappa", c.incompatibility.kappa},
            {"normalize", c.incompatibility.normalize},
            {"max_pairs", c.incompatibility.max_pairs}}},
          {"rewards",
           {{"alpha", c.rewards.alpha},
            {"beta", c.rewards.beta},
            {"confidence_pivot", c.rewards.confidence_pivot},
            {"clip_low", c.rewards.clip_low},
            {"clip_high", c.rewards.clip_high},
            {"gamma", c.rewards.gamma},
            {"delta", c.rewards.delta},
            {"kl_coefficient", c.rewards.kl_coefficient}}},
          {"output_dir", c.output_dir.generic_string()},
          {"seed", c.seed}};
}

}  // namespace ej::cli
