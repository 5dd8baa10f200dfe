#include "ej/rewards.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ej/error.h"

namespace ej {

void RewardConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) fail(ErrorKind::config_error, "alpha and beta must be >= 0");
  if (!(clip_low <= clip_high)) fail(ErrorKind::config_error, "clip range is empty");
}

RewardBreakdown composite_reward(Decision decision, double confidence, Decision ground_truth,
                                 double faith, bool json_valid, const RewardConfig& cfg) {
  const bool correct = decision == ground_truth;
  const double c = std::clamp(confidence, 0.0, 1.0);
  RewardBreakdown r;
  r.base = correct ? 1.0 : 0.0;
  r.confidence = correct ? std::min(c, 1.0) : -std::max(c - cfg.confidence_pivot, 0.0);
  r.faithfulness = json_valid ? std::max(faith, 0.0) : 0.0;
  r.unclipped = r.base + cfg.alpha * r.confidence + cfg.beta * r.faithfulness;
  r.reward = std::clamp(r.unclipped, cfg.clip_low, cfg.clip_high);
  return r;
}

std::vector<double> group_advantages(std::span<const double> rewards, double epsilon) {
  if (rewards.size() < 2) fail(ErrorKind::invalid_argument, "advantages need n >= 2 rewards");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back((r - mean) / (sd + epsilon));
  return out;
}

void label_sample(TrajectorySample& sample, const RewardConfig& cfg) {
  cfg.validate();
  sample.rewards.clear();
  for (const auto& resp : sample.responses) {
    sample.rewards.push_back(composite_reward(resp.decision, resp.confidence, sample.ground_truth,
                                              resp.faithfulness, resp.json_valid, cfg)
                                 .reward);
  }
  sample.advantages = group_advantages(sample.rewards);
}

std::string export_trajectories(const std::vector<TrajectorySample>& samples,
                                const ExportOptions& options) {
  std::string out;
  for (const auto& s : samples) {
    if (s.rewards.size() != s.responses.size() || s.advantages.size() != s.responses.size()) {
      fail(ErrorKind::invalid_argument, "sample is not labeled");
    }
    for (std::size_t i = 0; i < s.responses.size(); ++i) {
      const auto& r = s.responses[i];
      if (options.filter_faithful && !(r.faithfulness > options.faithfulness_threshold)) continue;
      nlohmann::json line = {{"prompt", s.prompt},
                             {"response", r.text},
                             {"reward", s.rewards[i]},
                             {"advantage", s.advantages[i]},
                             {"ground_truth", to_string(s.ground_truth)},
                             {"faithfulness", r.faithfulness}};
      out += line.dump();
      out += '\n';
    }
  }
  return out;
}

std::size_t write_trajectories(const std::filesystem::path& path,
                               const std::vector<TrajectorySample>& samples,
                               const ExportOptions& options) {
  const auto text = export_trajectories(samples, options);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io_failure, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::io_failure, "write failed for " + path.string());
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace ej
