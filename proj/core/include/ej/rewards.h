#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ej/audit.h"

namespace ej {

struct RewardConfig {
  double alpha = 0.2;
  double beta = 0.1;
  double confidence_pivot = 0.5;
  double clip_low = 0.0;
  double clip_high = 1.0;
  // Reserved coefficients with no defined reward term; carried as metadata.
  double gamma = 0.15;
  double delta = 0.05;
  double kl_coefficient = 1e-3;

  void validate() const;
};

struct RewardBreakdown {
  double base = 0.0;
  double confidence = 0.0;
  double faithfulness = 0.0;
  double unclipped = 0.0;
  double reward = 0.0;
};

// clip(r_base + alpha * r_conf + beta * r_faith) with r_base = 1[correct],
// r_conf = min(c, 1) * 1[correct] - max(c - pivot, 0) * 1[incorrect],
// r_faith = max(faith, 0) * 1[json_valid].
RewardBreakdown composite_reward(Decision decision, double confidence, Decision ground_truth,
                                 double faith, bool json_valid, const RewardConfig& cfg = {});

// (r_i - mean) / (population std + epsilon).
std::vector<double> group_advantages(std::span<const double> rewards, double epsilon = 1e-8);

struct ResponseCandidate {
  std::string text;
  Decision decision = Decision::continue_;
  double confidence = 0.0;
  double faithfulness = 0.0;
  bool json_valid = true;
};

struct TrajectorySample {
  std::string prompt;
  std::vector<ResponseCandidate> responses;
  Decision ground_truth = Decision::continue_;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

// Fills rewards and advantages for every response of the sample.
void label_sample(TrajectorySample& sample, const RewardConfig& cfg = {});

struct ExportOptions {
  bool filter_faithful = false;
  double faithfulness_threshold = 0.8;  // kept responses need faithfulness > threshold
};

// One JSON object per response: prompt, response, reward, advantage,
// ground_truth, faithfulness.
std::string export_trajectories(const std::vector<TrajectorySample>& samples,
                                const ExportOptions& options = {});
std::size_t write_trajectories(const std::filesystem::path& path,
                               const std::vector<TrajectorySample>& samples,
                               const ExportOptions& options = {});

}  // namespace ej
