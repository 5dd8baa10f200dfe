#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ej/series.h"

namespace ej {

struct IncompatibilityParams {
  double delta = 1.0;    // input-neighbourhood radius
  double epsilon = 0.5;  // output separation; pairs need |dy| > epsilon / delta
  int window_length = 8;
  double kappa = 1.0;
  bool normalize = true;  // z-score each window before comparing
  std::size_t max_pairs = 200000;
  std::uint64_t seed = 0;

  void validate() const;
};

// Fraction of ordered window pairs (diagonal included) whose windows lie
// within delta of each other while their next values differ by more than
// epsilon / delta. Uniform sampling without replacement replaces full
// enumeration when the pair count exceeds max_pairs.
double incompatibility_index(std::span<const double> values, const IncompatibilityParams& params);
double incompatibility_index(const TimeSeries& series, const IncompatibilityParams& params);

// I * ln(M) / (1 + exp(-kappa * I)).
double ensemble_advantage(double i_t, int m, double kappa = 1.0);

// ceil(I * K / (epsilon * (1 - rho))), at least 1.
int min_ensemble_size(double i_t, int k_regimes, double epsilon, double rho);

struct RegimeGenerator {
  double ar_coefficient = 0.5;
  double level = 0.0;
  double seasonal_amplitude = 0.0;
  double noise_scale = 1.0;
};

struct RegimeSynthesisSpec {
  std::vector<RegimeGenerator> regimes;
  std::vector<std::size_t> segment_lengths;  // cycled through the regimes in order
  int period = 12;
  int ar_order = 2;
  double ridge = 1e-3;
  double train_fraction = 0.7;
  std::uint64_t seed = 0;

  void validate() const;
  // Two regimes with AR coefficients +separation and -separation.
  static RegimeSynthesisSpec two_regime(double separation, std::uint64_t seed,
                                        std::size_t segment = 100, std::size_t segments = 8);
  static RegimeSynthesisSpec single_regime(double ar, std::uint64_t seed, std::size_t length = 800);
};

struct SynthesizedSeries {
  std::vector<double> values;
  std::vector<int> labels;  // regime of each sample
};

SynthesizedSeries synthesize(const RegimeSynthesisSpec& spec);

struct HarnessReport {
  std::uint64_t seed = 0;
  int regimes = 0;
  double loss_monolithic = 0.0;
  double loss_ensemble = 0.0;
  double incompatibility = 0.0;
  double omega = 0.0;
  bool inequality_holds = false;  // loss_ensemble <= loss_monolithic
};

// One global ridge autoregression against per-regime fits routed by the true
// regime label; test MSE on the samples after the training split.
HarnessReport theorem_harness(const RegimeSynthesisSpec& spec, const IncompatibilityParams& params);

void to_json(nlohmann::json& j, const HarnessReport& r);

}  // namespace ej
