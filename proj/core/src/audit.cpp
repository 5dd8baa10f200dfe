#include "ej/audit.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ej/error.h"

namespace ej {

std::string_view to_string(Decision d) noexcept {
  return d == Decision::accept ? "accept" : "continue";
}

Decision decision_from_string(std::string_view name) {
  if (name == "accept") return Decision::accept;
  if (name == "continue") return Decision::continue_;
  fail(ErrorKind::invalid_argument, "unknown decision '" + std::string(name) + "'");
}

bool AuditRecord::has_flag(std::string_view f) const {
  for (const auto& x : flags) {
    if (x == f) return true;
  }
  return false;
}

nlohmann::json real_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double real_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    fail(ErrorKind::data_error, "expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

void to_json(nlohmann::json& j, const AuditRecord& r) {
  j = nlohmann::json::object();
  j["iteration"] = r.iteration;
  j["kind"] = r.kind;
  j["weights"] = r.weights.vector();
  auto folds = nlohmann::json::array();
  for (const auto& w : r.fold_weights) folds.push_back(w.vector());
  j["fold_weights"] = std::move(folds);
  j["metric"] = to_string(r.metric);
  j["objective"] = real_to_json(r.objective);
  j["uniform_objective"] = real_to_json(r.uniform_objective);
  j["heldout_score"] = real_to_json(r.heldout_score);
  j["confidence"] = r.confidence;
  j["faithfulness"] = real_to_json(r.faithfulness);
  j["seasonality_risk"] = real_to_json(r.seasonality_risk);
  j["decision"] = to_string(r.decision);
  j["next_metric"] = r.next_metric ? nlohmann::json(to_string(*r.next_metric)) : nlohmann::json();
  j["ground_truth"] = to_string(r.ground_truth);
  j["explanation"] = {{"claims", r.claims.claims},
                      {"free_text", r.claims.free_text},
                      {"aspect_scores", r.aspect_scores}};
  j["weight_adjustment"] = r.weight_adjustment;
  j["judge"] = r.judge;
  j["trigger"] = r.trigger;
  j["flags"] = r.flags;
  j["error"] = r.error ? nlohmann::json(*r.error) : nlohmann::json();
}

void from_json(const nlohmann::json& j, AuditRecord& r) {
  r.iteration = j.at("iteration").get<int>();
  r.kind = j.value("kind", std::string(kOptimizationRecord));
  r.weights = WeightVector(j.at("weights").get<std::vector<double>>());
  r.fold_weights.clear();
  for (const auto& w : j.at("fold_weights")) {
    r.fold_weights.emplace_back(w.get<std::vector<double>>());
  }
  r.metric = metric_from_string(j.at("metric").get<std::string>());
  r.objective = real_from_json(j.at("objective"));
  r.uniform_objective = real_from_json(j.at("uniform_objective"));
  r.heldout_score = real_from_json(j.at("heldout_score"));
  r.confidence = j.at("confidence").get<double>();
  r.faithfulness = real_from_json(j.at("faithfulness"));
  r.seasonality_risk = real_from_json(j.at("seasonality_risk"));
  r.decision = decision_from_string(j.at("decision").get<std::string>());
  const auto& next = j.at("next_metric");
  r.next_metric = next.is_null() ? std::nullopt
                                 : std::optional<Metric>(metric_from_string(next.get<std::string>()));
  r.ground_truth = decision_from_string(j.at("ground_truth").get<std::string>());
  const auto& e = j.at("explanation");
  r.claims.claims = e.at("claims").get<std::vector<ComponentClaim>>();
  r.claims.free_text = e.at("free_text").get<std::string>();
  r.aspect_scores = e.at("aspect_scores").get<AspectScores>();
  r.weight_adjustment = j.at("weight_adjustment").get<std::vector<double>>();
  r.judge = j.at("judge").get<std::string>();
  r.trigger = j.value("trigger", std::string());
  r.flags = j.at("flags").get<std::vector<std::string>>();
  const auto& err = j.at("error");
  r.error = err.is_null() ? std::nullopt : std::optional<std::string>(err.get<std::string>());
}

std::string to_jsonl(const AuditTrail& trail) {
  std::string out;
  for (const auto& r : trail) {
    out += nlohmann::json(r).dump();
    out += '\n';
  }
  return out;
}

AuditTrail parse_jsonl(std::string_view text) {
  AuditTrail trail;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trail.push_back(nlohmann::json::parse(line).get<AuditRecord>());
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::data_error, "audit line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trail;
}

void write_jsonl(const std::filesystem::path& path, const AuditTrail& trail) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io_failure, "cannot write " + path.string());
  out << to_jsonl(trail);
  if (!out) fail(ErrorKind::io_failure, "write failed for " + path.string());
}

AuditTrail read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io_failure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_jsonl(ss.str());
}

}  // namespace ej
