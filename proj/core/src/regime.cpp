#include "ej/regime.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_set>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ej/error.h"

namespace ej {

void IncompatibilityParams::validate() const {
  if (!(delta > 0.0) || !(epsilon > 0.0) || !(kappa > 0.0)) {
    fail(ErrorKind::invalid_argument, "delta, epsilon and kappa must be positive");
  }
  if (window_length < 1) fail(ErrorKind::invalid_argument, "window_length must be >= 1");
  if (max_pairs == 0) fail(ErrorKind::invalid_argument, "max_pairs must be positive");
}

namespace {

std::vector<double> windows(std::span<const double> v, std::size_t len, std::size_t count,
                            bool normalize) {
  std::vector<double> out(count * len);
  for (std::size_t t = 0; t < count; ++t) {
    double* w = &out[t * len];
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(t), len, w);
    if (!normalize) continue;
    double mean = 0.0;
    for (std::size_t i = 0; i < len; ++i) mean += w[i];
    mean /= static_cast<double>(len);
    double var = 0.0;
    for (std::size_t i = 0; i < len; ++i) var += (w[i] - mean) * (w[i] - mean);
    const double sd = std::sqrt(var / static_cast<double>(len));
    for (std::size_t i = 0; i < len; ++i) w[i] = sd > 1e-12 ? (w[i] - mean) / sd : 0.0;
  }
  return out;
}

}  // namespace

double incompatibility_index(std::span<const double> values, const IncompatibilityParams& params) {
  params.validate();
  require_finite(values, "series");
  const auto len = static_cast<std::size_t>(params.window_length);
  if (values.size() <= len + 1) {
    fail(ErrorKind::series_too_short, "series must be longer than window_length + 1");
  }
  const std::size_t n = values.size() - len;  // windows with a following value
  const auto x = windows(values, len, n, params.normalize);
  const double out_threshold = params.epsilon / params.delta;
  const double d2 = params.delta * params.delta;

  auto hit = [&](std::size_t a, std::size_t b) {
    if (std::abs(values[a + len] - values[b + len]) <= out_threshold) return false;
    double dist = 0.0;
    const double* xa = &x[a * len];
    const double* xb = &x[b * len];
    for (std::size_t i = 0; i < len; ++i) {
      const double d = xa[i] - xb[i];
      dist += d * d;
      if (dist >= d2) return false;
    }
    return true;
  };

  const auto total = static_cast<unsigned long long>(n) * n;
  if (total <= params.max_pairs) {
    std::size_t count = 0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) count += hit(a, b);
    }
    return static_cast<double>(count) / static_cast<double>(total);
  }
  // Floyd's algorithm: max_pairs distinct pair indices out of n * n.
  std::mt19937_64 rng(params.seed);
  std::unordered_set<unsigned long long> chosen;
  chosen.reserve(params.max_pairs * 2);
  std::size_t count = 0;
  for (auto j = total - params.max_pairs; j < total; ++j) {
    std::uniform_int_distribution<unsigned long long> pick(0, j);
    auto t = pick(rng);
    if (!chosen.insert(t).second) {
      t = j;
      chosen.insert(t);
    }
    count += hit(static_cast<std::size_t>(t / n), static_cast<std::size_t>(t % n));
  }
  return static_cast<double>(count) / static_cast<double>(params.max_pairs);
}

double incompatibility_index(const TimeSeries& series, const IncompatibilityParams& params) {
  return incompatibility_index(series.values, params);
}

double ensemble_advantage(double i_t, int m, double kappa) {
  if (!(i_t >= 0.0)) fail(ErrorKind::invalid_argument, "incompatibility must be >= 0");
  if (m < 1) fail(ErrorKind::invalid_argument, "ensemble size must be >= 1");
  return i_t * std::log(static_cast<double>(m)) / (1.0 + std::exp(-kappa * i_t));
}

int min_ensemble_size(double i_t, int k_regimes, double epsilon, double rho) {
  if (!(epsilon > 0.0)) fail(ErrorKind::invalid_argument, "epsilon must be positive");
  if (rho >= 1.0) fail(ErrorKind::degenerate_correlation, "rho_regime must be < 1");
  if (!(rho >= 0.0)) fail(ErrorKind::invalid_argument, "rho_regime must be >= 0");
  if (!(i_t >= 0.0) || k_regimes < 0) {
    fail(ErrorKind::invalid_argument, "incompatibility and regime count must be >= 0");
  }
  const double bound = i_t * k_regimes / (epsilon * (1.0 - rho));
  // Absorb rounding so exact integer bounds are not bumped up by one.
  const double m = std::ceil(bound - 1e-9 * std::max(1.0, bound));
  return std::max(1, static_cast<int>(m));
}

void RegimeSynthesisSpec::validate() const {
  if (regimes.empty()) fail(ErrorKind::invalid_argument, "at least one regime is required");
  if (segment_lengths.empty()) fail(ErrorKind::invalid_argument, "no segments");
  for (auto l : segment_lengths) {
    if (l == 0) fail(ErrorKind::invalid_argument, "segment lengths must be positive");
  }
  if (ar_order < 1) fail(ErrorKind::invalid_argument, "ar_order must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::invalid_argument, "train_fraction must lie in (0, 1)");
  }
  if (period < 1) fail(ErrorKind::invalid_argument, "period must be >= 1");
}

RegimeSynthesisSpec RegimeSynthesisSpec::two_regime(double separation, std::uint64_t seed,
                                                    std::size_t segment, std::size_t segments) {
  RegimeSynthesisSpec s;
  s.regimes = {{separation, 0.0, 0.0, 1.0}, {-separation, 0.0, 0.0, 1.0}};
  s.segment_lengths.assign(segments, segment);
  s.seed = seed;
  return s;
}

RegimeSynthesisSpec RegimeSynthesisSpec::single_regime(double ar, std::uint64_t seed,
                                                       std::size_t length) {
  RegimeSynthesisSpec s;
  s.regimes = {{ar, 0.0, 0.0, 1.0}};
  s.segment_lengths = {length};
  s.seed = seed;
  return s;
}

SynthesizedSeries synthesize(const RegimeSynthesisSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  SynthesizedSeries out;
  double prev = 0.0;
  std::size_t t = 0;
  for (std::size_t s = 0; s < spec.segment_lengths.size(); ++s) {
    const auto r = static_cast<int>(s % spec.regimes.size());
    const auto& g = spec.regimes[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < spec.segment_lengths[s]; ++i, ++t) {
      const double seasonal =
          g.seasonal_amplitude *
          std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / spec.period);
      const double v = g.level + g.ar_coefficient * (prev - g.level) + seasonal +
                       g.noise_scale * noise(rng);
      out.values.push_back(v);
      out.labels.push_back(r);
      prev = v;
    }
  }
  return out;
}

namespace {

Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  return gram.ldlt().solve(x.transpose() * y);
}

}  // namespace

HarnessReport theorem_harness(const RegimeSynthesisSpec& spec,
                              const IncompatibilityParams& params) {
  const auto data = synthesize(spec);
  const auto p = static_cast<std::size_t>(spec.ar_order);
  const auto n = data.values.size();
  if (n < 4 * (p + 1)) fail(ErrorKind::series_too_short, "synthesized series is too short");

  // Row for target t: [1, y_{t-1}, ..., y_{t-p}].
  const std::size_t rows = n - p;
  Eigen::MatrixXd x(rows, p + 1);
  Eigen::VectorXd y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto t = r + p;
    x(r, 0) = 1.0;
    for (std::size_t k = 1; k <= p; ++k) x(r, k) = data.values[t - k];
    y(r) = data.values[t];
  }
  const auto split = static_cast<std::size_t>(std::floor(spec.train_fraction * rows));
  const auto test = rows - split;
  if (split < p + 2 || test == 0) fail(ErrorKind::series_too_short, "train/test split is empty");

  const auto mono = ridge_fit(x.topRows(split), y.head(split), spec.ridge);
  double loss_mono = 0.0;
  for (std::size_t r = split; r < rows; ++r) {
    const double e = x.row(r).dot(mono) - y(r);
    loss_mono += e * e;
  }
  loss_mono /= static_cast<double>(test);

  const int k = static_cast<int>(spec.regimes.size());
  std::vector<Eigen::VectorXd> experts(static_cast<std::size_t>(k));
  for (int reg = 0; reg < k; ++reg) {
    std::vector<Eigen::Index> idx;
    for (std::size_t r = 0; r < split; ++r) {
      if (data.labels[r + p] == reg) idx.push_back(static_cast<Eigen::Index>(r));
    }
    if (idx.size() < p + 1) {
      experts[static_cast<std::size_t>(reg)] = mono;  // too little data: fall back to the global fit
      continue;
    }
    Eigen::MatrixXd xr(static_cast<Eigen::Index>(idx.size()), p + 1);
    Eigen::VectorXd yr(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      xr.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
      yr(static_cast<Eigen::Index>(i)) = y(idx[i]);
    }
    experts[static_cast<std::size_t>(reg)] = ridge_fit(xr, yr, spec.ridge);
  }
  double loss_ens = 0.0;
  for (std::size_t r = split; r < rows; ++r) {
    const auto reg = static_cast<std::size_t>(data.labels[r + p]);
    const double e = x.row(static_cast<Eigen::Index>(r)).dot(experts[reg]) - y(static_cast<Eigen::Index>(r));
    loss_ens += e * e;
  }
  loss_ens /= static_cast<double>(test);

  HarnessReport rep;
  rep.seed = spec.seed;
  rep.regimes = k;
  rep.loss_monolithic = loss_mono;
  rep.loss_ensemble = loss_ens;
  rep.incompatibility = incompatibility_index(data.values, params);
  rep.omega = ensemble_advantage(rep.incompatibility, k, params.kappa);
  rep.inequality_holds = loss_ens <= loss_mono;
  return rep;
}

void to_json(nlohmann::json& j, const HarnessReport& r) {
  j = {{"seed", r.seed},
       {"regimes", r.regimes},
       {"loss_monolithic", r.loss_monolithic},
       {"loss_ensemble", r.loss_ensemble},
       {"incompatibility", r.incompatibility},
       {"omega", r.omega},
       {"inequality_holds", r.inequality_holds}};
}

}  // namespace ej
