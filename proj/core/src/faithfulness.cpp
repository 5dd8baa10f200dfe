#include "ej/faithfulness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ej/error.h"

namespace ej {

std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::helps: return "helps";
    case Direction::hurts: return "hurts";
    case Direction::neutral: return "neutral";
  }
  return "neutral";
}

Direction direction_from_string(std::string_view name) {
  if (name == "helps") return Direction::helps;
  if (name == "hurts") return Direction::hurts;
  if (name == "neutral") return Direction::neutral;
  fail(ErrorKind::invalid_argument, "unknown direction '" + std::string(name) + "'");
}

double direction_sign(Direction d) noexcept {
  switch (d) {
    case Direction::helps: return -1.0;
    case Direction::hurts: return 1.0;
    case Direction::neutral: return 0.0;
  }
  return 0.0;
}

const ComponentClaim* ExplanationClaims::find(std::string_view model, Component c) const {
  for (const auto& claim : claims) {
    if (claim.model == model && claim.component == c) return &claim;
  }
  return nullptr;
}

void ExplanationClaims::validate() const {
  for (const auto& c : claims) {
    if (!(c.importance >= 0.0 && c.importance <= 1.0)) {
      fail(ErrorKind::invalid_argument, "claim importance for " + c.model + "/" +
                                            std::string(to_string(c.component)) +
                                            " is outside [0, 1]");
    }
  }
}

void to_json(nlohmann::json& j, const ComponentClaim& c) {
  j = nlohmann::json{{"model", c.model},
                     {"component", to_string(c.component)},
                     {"importance", c.importance},
                     {"direction", to_string(c.direction)}};
}

void from_json(const nlohmann::json& j, ComponentClaim& c) {
  c.model = j.at("model").get<std::string>();
  c.component = component_from_string(j.at("component").get<std::string>());
  c.importance = j.at("importance").get<double>();
  c.direction = direction_from_string(j.value("direction", std::string("neutral")));
}

void to_json(nlohmann::json& j, const ExplanationClaims& c) {
  j = nlohmann::json{{"claims", c.claims}, {"free_text", c.free_text}};
}

void from_json(const nlohmann::json& j, ExplanationClaims& c) {
  if (j.is_array()) {
    c.claims = j.get<std::vector<ComponentClaim>>();
    c.free_text.clear();
    return;
  }
  c.claims = j.at("claims").get<std::vector<ComponentClaim>>();
  c.free_text = j.value("free_text", std::string());
}

std::string_view to_string(PatternKind k) noexcept {
  switch (k) {
    case PatternKind::overstatement: return "Overstatement";
    case PatternKind::understatement: return "Understatement";
    case PatternKind::wrong_direction: return "Wrong direction";
    case PatternKind::missed_pattern: return "Missed pattern";
  }
  return "Unknown";
}

std::string UnfaithfulnessPattern::describe() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: %s %s (claimed %.2f, SHAP %.3f | %.3f)",
                std::string(to_string(kind)).c_str(), model.c_str(),
                std::string(to_string(component)).c_str(), claimed_importance, shap_normalized,
                shap_raw);
  return buf;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::length_mismatch, "pearson: length mismatch");
  const auto n = a.size();
  if (n < 2) return std::nullopt;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  // Relative guard so vectors that are constant up to rounding count as degenerate.
  const double scale_a = std::max(1e-300, std::abs(ma) * std::abs(ma) * static_cast<double>(n));
  const double scale_b = std::max(1e-300, std::abs(mb) * std::abs(mb) * static_cast<double>(n));
  if (saa <= 1e-24 * scale_a || saa == 0.0 || sbb <= 1e-24 * scale_b || sbb == 0.0) {
    return std::nullopt;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return v[x] < v[y]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

int cmp(double a, double b, double tol) {
  if (std::abs(a - b) <= tol) return 0;
  return a < b ? -1 : 1;
}

}  // namespace

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

std::vector<double> causal_effects(const ShapReport& report) {
  std::vector<double> ce;
  ce.reserve(report.models.size() * 3);
  for (const auto& m : report.models) {
    for (auto c : kComponents) ce.push_back(m.raw_of(c));
  }
  return ce;
}

std::vector<double> explanation_effects(const ShapReport& report,
                                        const ExplanationClaims& claims) {
  std::vector<double> ee;
  ee.reserve(report.models.size() * 3);
  for (const auto& m : report.models) {
    for (auto c : kComponents) {
      const auto* claim = claims.find(m.model_id, c);
      ee.push_back(claim ? claim->importance * direction_sign(claim->direction) : 0.0);
    }
  }
  return ee;
}

std::vector<UnfaithfulnessPattern> detect_unfaithfulness(const ShapReport& report,
                                                         const ExplanationClaims& claims,
                                                         double tau_low, double tau_high) {
  if (!(tau_low >= 0.0 && tau_low < tau_high)) {
    fail(ErrorKind::invalid_argument, "thresholds must satisfy 0 <= tau_low < tau_high");
  }
  std::vector<UnfaithfulnessPattern> out;
  for (const auto& m : report.models) {
    for (auto c : kComponents) {
      const auto* claim = claims.find(m.model_id, c);
      const double norm = m.normalized_of(c);
      const double raw = m.raw_of(c);
      auto add = [&](PatternKind kind) {
        out.push_back({kind, m.model_id, c, claim ? claim->importance : 0.0, norm, raw});
      };
      if (claim == nullptr) {
        if (c == Component::seasonality && norm > tau_high) add(PatternKind::missed_pattern);
        continue;
      }
      if (claim->importance >= 0.6 && norm < tau_low) add(PatternKind::overstatement);
      if (claim->importance <= 0.2 && norm > tau_high) add(PatternKind::understatement);
      if (claim->direction == Direction::helps && raw > 0.0) add(PatternKind::wrong_direction);
    }
  }
  return out;
}

FaithfulnessResult faithfulness(const ShapReport& report, const ExplanationClaims& claims,
                                const FaithfulnessParams& params) {
  claims.validate();
  if (report.models.empty()) fail(ErrorKind::invalid_argument, "SHAP report has no models");
  FaithfulnessResult out;
  const auto ce = causal_effects(report);
  const auto ee = explanation_effects(report, claims);
  out.pcc = pearson(ce, ee);

  std::vector<double> magnitude(ce.size()), importance(ce.size());
  for (std::size_t i = 0; i < ce.size(); ++i) {
    magnitude[i] = std::abs(ce[i]);
    importance[i] = std::abs(ee[i]);
  }

  // Rank alignment.
  if (const auto rho = spearman(magnitude, importance)) {
    out.rank_alignment = std::max(0.0, *rho);
  } else {
    const bool flat_m = !pearson(magnitude, magnitude).has_value();
    const bool flat_i = !pearson(importance, importance).has_value();
    out.rank_alignment = (flat_m && flat_i) ? 1.0 : 0.0;
  }

  // Magnitude alignment over per-model normalized vectors.
  double gap = 0.0;
  int pairs_total = 0, pairs_matched = 0;
  for (std::size_t m = 0; m < report.models.size(); ++m) {
    std::array<double, 3> imp{};
    for (std::size_t c = 0; c < 3; ++c) imp[c] = importance[m * 3 + c];
    const auto norm_ee = normalize_magnitudes(imp);
    const auto& norm_ce = report.models[m].normalized;
    for (std::size_t c = 0; c < 3; ++c) gap += std::abs(norm_ce[c] - norm_ee[c]);
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a + 1; b < 3; ++b) {
        ++pairs_total;
        if (cmp(norm_ce[a], norm_ce[b], 1e-12) == cmp(imp[a], imp[b], 1e-12)) ++pairs_matched;
      }
    }
  }
  out.magnitude_alignment =
      std::clamp(1.0 - gap / static_cast<double>(report.models.size() * 3), 0.0, 1.0);
  out.pattern_recognition = static_cast<double>(pairs_matched) / pairs_total;

  out.reward_score = out.pcc ? std::clamp(*out.pcc, 0.0, 1.0) : out.rank_alignment;
  out.patterns = detect_unfaithfulness(report, claims, params.tau_low, params.tau_high);
  return out;
}

std::string render_faithfulness(const ModelShap& shap, const FaithfulnessResult& result,
                                const std::string& excerpt,
                                const std::vector<std::string>& component_notes) {
  std::string out = "SHAP Values (normalized | raw):\n";
  char buf[160];
  for (std::size_t i = 0; i < 3; ++i) {
    auto name = std::string(to_string(kComponents[i]));
    name[0] = static_cast<char>(name[0] - 'a' + 'A');
    std::snprintf(buf, sizeof buf, "- %s: %.3f (%.3f)", name.c_str(), shap.normalized[i],
                  shap.raw[i]);
    out += buf;
    if (i < component_notes.size() && !component_notes[i].empty()) {
      out += " [" + component_notes[i] + "]";
    }
    out += '\n';
  }
  out += '\n';
  if (!excerpt.empty()) out += "Explanation Extract: \"" + excerpt + "\"\n\n";
  std::snprintf(buf, sizeof buf, "Faithfulness Score: %.2f\n", result.reward_score);
  out += buf;
  std::snprintf(buf, sizeof buf, "- Rank alignment: %.2f\n", result.rank_alignment);
  out += buf;
  std::snprintf(buf, sizeof buf, "- Magnitude alignment: %.2f\n", result.magnitude_alignment);
  out += buf;
  std::snprintf(buf, sizeof buf, "- Pattern recognition: %.2f\n", result.pattern_recognition);
  out += buf;
  out += '\n';
  if (result.patterns.empty()) {
    out += "Unfaithfulness Patterns: None detected\n";
  } else {
    out += "Unfaithfulness Patterns:\n";
    for (const auto& p : result.patterns) out += "- " + p.describe() + '\n';
  }
  return out;
}

}  // namespace ej
