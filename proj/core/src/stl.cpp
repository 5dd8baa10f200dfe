#include "ej/stl.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "ej/error.h"

namespace ej {

std::string_view to_string(Component c) noexcept {
  switch (c) {
    case Component::trend: return "trend";
    case Component::seasonality: return "seasonality";
    case Component::residual: return "residual";
  }
  return "unknown";
}

Component component_from_string(std::string_view name) {
  if (name == "trend") return Component::trend;
  if (name == "seasonality" || name == "seasonal") return Component::seasonality;
  if (name == "residual") return Component::residual;
  fail(ErrorKind::invalid_argument, "unknown component '" + std::string(name) + "'");
}

std::string subset_label(ComponentSubset s) {
  std::string out;
  if (s.contains(Component::trend)) out += 'T';
  if (s.contains(Component::seasonality)) out += 'S';
  if (s.contains(Component::residual)) out += 'R';
  return out;
}

std::span<const double> Decomposition::component(Component c) const {
  switch (c) {
    case Component::trend: return trend;
    case Component::seasonality: return seasonal;
    case Component::residual: return residual;
  }
  return {};
}

Decomposition Decomposition::slice(std::size_t begin, std::size_t length) const {
  if (begin + length > size()) {
    fail(ErrorKind::length_mismatch, "decomposition slice out of range");
  }
  auto cut = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                               v.begin() + static_cast<std::ptrdiff_t>(begin + length));
  };
  return Decomposition{cut(trend), cut(seasonal), cut(residual)};
}

namespace {

int next_odd(double x) {
  auto v = static_cast<int>(std::ceil(x - 1e-9));
  if (v < 3) v = 3;
  if (v % 2 == 0) ++v;
  return v;
}

std::optional<double> loess_fit(std::span<const double> y, std::span<const double> rw,
                                double x, int q, int degree) {
  const auto n = static_cast<int>(y.size());
  if (n == 0) return std::nullopt;
  int left = 0;
  int right = n - 1;
  if (q < n) {
    left = static_cast<int>(std::floor(x + 0.5)) - (q - 1) / 2;
    left = std::clamp(left, 0, n - q);
    right = left + q - 1;
  }
  double h = std::max(x - left, right - x);
  if (q > n) h += static_cast<double>((q - n) / 2);
  if (h <= 0.0) h = 1.0;

  const double h9 = 0.999 * h;
  const double h1 = 0.001 * h;
  std::vector<double> w(static_cast<std::size_t>(right - left + 1), 0.0);
  double total = 0.0;
  for (int j = left; j <= right; ++j) {
    const double r = std::abs(j - x);
    double wj = 0.0;
    if (r <= h9) {
      if (r <= h1) {
        wj = 1.0;
      } else {
        const double u = r / h;
        const double t = 1.0 - u * u * u;
        wj = t * t * t;
      }
      if (!rw.empty()) wj *= rw[static_cast<std::size_t>(j)];
    }
    w[static_cast<std::size_t>(j - left)] = wj;
    total += wj;
  }
  if (total <= 0.0) return std::nullopt;
  for (auto& wj : w) wj /= total;

  if (degree >= 1 && h > 0.0) {
    double a = 0.0;
    for (int j = left; j <= right; ++j) a += w[static_cast<std::size_t>(j - left)] * j;
    double c = 0.0;
    for (int j = left; j <= right; ++j) {
      const double d = j - a;
      c += w[static_cast<std::size_t>(j - left)] * d * d;
    }
    const double range = static_cast<double>(n - 1);
    if (std::sqrt(c) > 0.001 * range) {
      const double b = (x - a) / c;
      for (int j = left; j <= right; ++j) {
        w[static_cast<std::size_t>(j - left)] *= b * (j - a) + 1.0;
      }
    }
  }
  double out = 0.0;
  for (int j = left; j <= right; ++j) {
    out += w[static_cast<std::size_t>(j - left)] * y[static_cast<std::size_t>(j)];
  }
  return out;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t len) {
  std::vector<double> out;
  if (x.size() < len) return out;
  out.reserve(x.size() - len + 1);
  double sum = std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(len), 0.0);
  out.push_back(sum / static_cast<double>(len));
  for (std::size_t i = len; i < x.size(); ++i) {
    sum += x[i] - x[i - len];
    out.push_back(sum / static_cast<double>(len));
  }
  return out;
}

// Smooths each cycle-subseries and extends it one period on both sides.
// Output index i corresponds to time i - period.
std::vector<double> cycle_subseries(std::span<const double> detrended,
                                    std::span<const double> rw, int period, bool periodic,
                                    int ns, int degree) {
  const auto n = detrended.size();
  const auto p = static_cast<std::size_t>(period);
  std::vector<double> c(n + 2 * p, 0.0);
  std::vector<double> sub;
  std::vector<double> subw;
  for (std::size_t j = 0; j < p; ++j) {
    sub.clear();
    subw.clear();
    for (std::size_t t = j; t < n; t += p) {
      sub.push_back(detrended[t]);
      subw.push_back(rw[t]);
    }
    const auto m = static_cast<int>(sub.size());
    if (periodic) {
      double sw = 0.0;
      double sy = 0.0;
      for (int k = 0; k < m; ++k) {
        sw += subw[static_cast<std::size_t>(k)];
        sy += subw[static_cast<std::size_t>(k)] * sub[static_cast<std::size_t>(k)];
      }
      double mean = 0.0;
      if (sw > 0.0) {
        mean = sy / sw;
      } else {
        mean = std::accumulate(sub.begin(), sub.end(), 0.0) / m;
      }
      for (int k = -1; k <= m; ++k) {
        c[j + static_cast<std::size_t>(k + 1) * p] = mean;
      }
    } else {
      for (int k = -1; k <= m; ++k) {
        auto fit = loess_fit(sub, subw, k, ns, degree);
        if (!fit) fit = loess_fit(sub, {}, k, ns, degree);
        c[j + static_cast<std::size_t>(k + 1) * p] = *fit;
      }
    }
  }
  return c;
}

std::vector<double> robustness_weights(std::span<const double> y, std::span<const double> trend,
                                       std::span<const double> seasonal) {
  const auto n = y.size();
  std::vector<double> r(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = std::abs(y[i] - trend[i] - seasonal[i]);
    scale = std::max(scale, std::abs(y[i]));
  }
  std::vector<double> sorted = r;
  const auto mid = sorted.size() / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
  double median = sorted[mid];
  if (sorted.size() % 2 == 0) {
    const double lower =
        *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  const double h = 6.0 * median;
  std::vector<double> w(n, 1.0);
  if (h <= 1e-12 * std::max(1.0, scale)) return w;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = r[i] / h;
    if (u <= 0.001) {
      w[i] = 1.0;
    } else if (u <= 0.999) {
      const double t = 1.0 - u * u;
      w[i] = t * t;
    } else {
      w[i] = 0.0;
    }
  }
  return w;
}

double variance(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size());
}

}  // namespace

double loess_at(std::span<const double> y, std::span<const double> robustness, double x,
                int q, int degree) {
  auto fit = loess_fit(y, robustness, x, q, degree);
  if (!fit) fit = loess_fit(y, {}, x, q, degree);
  return fit.value_or(0.0);
}

Decomposition decompose(std::span<const double> values, int period,
                        const DecompositionParams& params) {
  if (period < 2) fail(ErrorKind::invalid_argument, "seasonal decomposition needs period >= 2");
  const auto n = values.size();
  const auto p = static_cast<std::size_t>(period);
  if (n < 2 * p) {
    fail(ErrorKind::series_too_short, "series of length " + std::to_string(n) +
                                          " is shorter than two periods of " +
                                          std::to_string(period));
  }
  require_finite(values, "series");

  const bool periodic = params.seasonal_window <= 0;
  const int ns = periodic ? static_cast<int>(10 * n + 1) : next_odd(params.seasonal_window);
  const int nl = params.lowpass_window > 0 ? next_odd(params.lowpass_window) : next_odd(period);
  const int nt = params.trend_window > 0
                     ? next_odd(params.trend_window)
                     : next_odd(1.5 * period / (1.0 - 1.5 / ns));
  const int inner = std::max(1, params.inner_iterations);
  const int outer = std::max(0, params.robust_iterations);

  std::vector<double> trend(n, 0.0);
  std::vector<double> seasonal(n, 0.0);
  std::vector<double> rw(n, 1.0);
  std::vector<double> work(n);

  for (int pass = 0; pass <= outer; ++pass) {
    for (int it = 0; it < inner; ++it) {
      for (std::size_t i = 0; i < n; ++i) work[i] = values[i] - trend[i];
      const auto cycle =
          cycle_subseries(work, rw, period, periodic, ns, params.seasonal_degree);

      auto low = moving_average(cycle, p);
      low = moving_average(low, p);
      low = moving_average(low, 3);
      for (std::size_t i = 0; i < n; ++i) {
        seasonal[i] = cycle[p + i] - loess_at(low, {}, static_cast<double>(i), nl, 1);
      }

      for (std::size_t i = 0; i < n; ++i) work[i] = values[i] - seasonal[i];
      for (std::size_t i = 0; i < n; ++i) {
        trend[i] = loess_at(work, rw, static_cast<double>(i), nt, 1);
      }
    }
    if (pass < outer) rw = robustness_weights(values, trend, seasonal);
  }

  // Centre the seasonal component per full period; a trailing partial period
  // reuses the last full period's offset.
  const std::size_t full = n / p;
  double offset = 0.0;
  for (std::size_t b = 0; b < full; ++b) {
    double mean = 0.0;
    for (std::size_t i = b * p; i < (b + 1) * p; ++i) mean += seasonal[i];
    mean /= static_cast<double>(p);
    offset = mean;
    for (std::size_t i = b * p; i < (b + 1) * p; ++i) {
      seasonal[i] -= mean;
      trend[i] += mean;
    }
  }
  for (std::size_t i = full * p; i < n; ++i) {
    seasonal[i] -= offset;
    trend[i] += offset;
  }

  Decomposition out;
  out.residual.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.residual[i] = values[i] - trend[i] - seasonal[i];
  out.trend = std::move(trend);
  out.seasonal = std::move(seasonal);
  return out;
}

Decomposition decompose(const TimeSeries& series, const DecompositionParams& params) {
  return decompose(series.values, series.period, params);
}

std::vector<double> reconstruct_subset(const Decomposition& decomp, ComponentSubset subset) {
  std::vector<double> out(decomp.size(), 0.0);
  for (Component c : kComponents) {
    if (!subset.contains(c)) continue;
    const auto part = decomp.component(c);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += part[i];
  }
  return out;
}

double seasonal_strength(const Decomposition& decomp) {
  std::vector<double> sr(decomp.size());
  for (std::size_t i = 0; i < sr.size(); ++i) sr[i] = decomp.seasonal[i] + decomp.residual[i];
  const double denom = variance(sr);
  if (denom <= 0.0) return 0.0;
  return std::clamp(1.0 - variance(decomp.residual) / denom, 0.0, 1.0);
}

double trend_strength(const Decomposition& decomp) {
  std::vector<double> tr(decomp.size());
  for (std::size_t i = 0; i < tr.size(); ++i) tr[i] = decomp.trend[i] + decomp.residual[i];
  const double denom = variance(tr);
  if (denom <= 0.0) return 0.0;
  return std::clamp(1.0 - variance(decomp.residual) / denom, 0.0, 1.0);
}

}  // namespace ej
