#include "ej/simplex.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "ej/error.h"
#include "ej/series.h"
#include "simplex_qp.h"

namespace ej {

WeightVector::WeightVector(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) fail(ErrorKind::invalid_argument, "weight vector is empty");
  double sum = 0.0;
  for (auto& v : w_) {
    if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "weight is not finite");
    if (v < -1e-12) {
      fail(ErrorKind::invalid_argument, "weight " + std::to_string(v) + " is negative");
    }
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorKind::invalid_argument, "weights sum to " + std::to_string(sum) + ", not 1");
  }
  if (sum != 1.0) {
    for (auto& v : w_) v /= sum;
  }
}

WeightVector WeightVector::uniform(std::size_t m) {
  if (m == 0) fail(ErrorKind::invalid_argument, "uniform weights need m >= 1");
  return WeightVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

WeightVector WeightVector::vertex(std::size_t m, std::size_t index) {
  if (index >= m) fail(ErrorKind::invalid_argument, "vertex index out of range");
  std::vector<double> w(m, 0.0);
  w[index] = 1.0;
  return WeightVector(std::move(w));
}

double WeightVector::entropy() const noexcept {
  double h = 0.0;
  for (double v : w_) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

bool ForecastMatrix::has_quantiles() const noexcept {
  return !columns.empty() &&
         std::all_of(columns.begin(), columns.end(),
                     [](const ModelForecast& c) { return c.quantiles.has_value(); });
}

void ForecastMatrix::validate() const {
  if (columns.size() < 2) fail(ErrorKind::invalid_argument, "forecast matrix needs M >= 2 models");
  if (!model_ids.empty() && model_ids.size() != columns.size()) {
    fail(ErrorKind::invalid_argument, "model id count does not match column count");
  }
  const auto n = horizon();
  if (n == 0) fail(ErrorKind::length_mismatch, "forecast columns are empty");
  const QuantileForecast* grid = nullptr;
  for (std::size_t m = 0; m < columns.size(); ++m) {
    const auto& col = columns[m];
    if (col.point.size() != n) fail(ErrorKind::length_mismatch, "forecast columns differ in length");
    for (double v : col.point) {
      if (!std::isfinite(v)) fail(ErrorKind::non_finite_input, "forecast matrix has a non-finite entry");
    }
    if (col.quantiles) {
      if (col.quantiles->horizon() != n) {
        fail(ErrorKind::length_mismatch, "quantile horizon differs from point horizon");
      }
      if (grid == nullptr) {
        grid = &*col.quantiles;
      } else if (grid->levels != col.quantiles->levels) {
        fail(ErrorKind::invalid_argument, "members use different quantile levels");
      }
    }
  }
}

std::vector<double> ForecastMatrix::combine(std::span<const double> w) const {
  std::vector<double> out(horizon(), 0.0);
  for (std::size_t m = 0; m < columns.size(); ++m) {
    const auto& col = columns[m].point;
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += w[m] * col[t];
  }
  return out;
}

ModelForecast ForecastMatrix::combine_forecast(std::span<const double> w) const {
  ModelForecast out;
  out.point = combine(w);
  if (has_quantiles()) {
    const auto& first = *columns.front().quantiles;
    QuantileForecast q;
    q.levels = first.levels;
    q.values.assign(first.horizon(), std::vector<double>(first.levels.size(), 0.0));
    for (std::size_t m = 0; m < columns.size(); ++m) {
      const auto& qm = *columns[m].quantiles;
      for (std::size_t t = 0; t < q.values.size(); ++t) {
        for (std::size_t l = 0; l < q.levels.size(); ++l) q.values[t][l] += w[m] * qm.values[t][l];
      }
    }
    out.quantiles = std::move(q);
  }
  return out;
}

bool ForecastMatrix::columns_identical() const {
  for (std::size_t m = 1; m < columns.size(); ++m) {
    if (columns[m].point != columns[0].point) return false;
    const bool qa = columns[m].quantiles.has_value();
    const bool qb = columns[0].quantiles.has_value();
    if (qa != qb) return false;
    if (qa && columns[m].quantiles->values != columns[0].quantiles->values) return false;
  }
  return true;
}

double ensemble_objective(std::span<const double> truth, const ForecastMatrix& x, Metric metric,
                          std::span<const double> w, const MaseContext* mase) {
  return score(metric, truth, x.combine_forecast(w), mase);
}

namespace {

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd grad;
};

double sign(double v) { return (v > 0.0) - (v < 0.0); }

class Objective {
 public:
  Objective(std::span<const double> truth, const ForecastMatrix& x, Metric metric,
            const MaseContext* mase)
      : truth_(truth), x_(x), metric_(metric), mase_(mase) {
    if (metric_ == Metric::mase) {
      if (mase_ == nullptr) fail(ErrorKind::invalid_argument, "MASE requires in-sample history");
      mase_scale_ = mase_denominator(*mase_);
    }
  }

  Evaluation operator()(const Eigen::VectorXd& w) const {
    const auto m = x_.models();
    const auto n = truth_.size();
    const std::span<const double> ws(w.data(), static_cast<std::size_t>(w.size()));
    Evaluation ev;
    ev.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));

    if (metric_ == Metric::crps) {
      const auto combined = x_.combine_forecast(ws);
      const auto& q = *combined.quantiles;
      ev.value = crps_from_quantiles(truth_, q);
      const double norm = 2.0 / static_cast<double>(n * q.levels.size());
      for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t l = 0; l < q.levels.size(); ++l) {
          const double diff = truth_[t] - q.values[t][l];
          double d = 0.0;
          if (diff > 0.0) d = -q.levels[l];
          else if (diff < 0.0) d = 1.0 - q.levels[l];
          if (d == 0.0) continue;
          for (std::size_t k = 0; k < m; ++k) {
            ev.grad[static_cast<Eigen::Index>(k)] += norm * d * x_.columns[k].quantiles->values[t][l];
          }
        }
      }
      check(ev);
      return ev;
    }

    const auto yhat = x_.combine(ws);
    std::vector<double> dl(n, 0.0);  // dLoss / dyhat_t
    const auto nn = static_cast<double>(n);
    switch (metric_) {
      case Metric::mse:
      case Metric::rmse: {
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          const double e = yhat[t] - truth_[t];
          acc += e * e;
          dl[t] = 2.0 * e / nn;
        }
        ev.value = acc / nn;
        if (metric_ == Metric::rmse) {
          const double r = std::sqrt(ev.value);
          ev.value = r;
          for (auto& d : dl) d = r > 0.0 ? d / (2.0 * r) : 0.0;
        }
        break;
      }
      case Metric::mae:
      case Metric::mase: {
        const double s = metric_ == Metric::mase ? mase_scale_ : 1.0;
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          const double e = yhat[t] - truth_[t];
          acc += std::abs(e);
          dl[t] = sign(e) / (nn * s);
        }
        ev.value = acc / nn / s;
        break;
      }
      case Metric::smape: {
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          const double e = yhat[t] - truth_[t];
          const double den = std::abs(truth_[t]) + std::abs(yhat[t]);
          if (den <= 0.0) continue;
          acc += 2.0 * std::abs(e) / den;
          dl[t] = 2.0 * (sign(e) * den - std::abs(e) * sign(yhat[t])) / (den * den) / nn;
        }
        ev.value = acc / nn;
        break;
      }
      case Metric::crps:
        break;
    }
    for (std::size_t k = 0; k < m; ++k) {
      const auto& col = x_.columns[k].point;
      double g = 0.0;
      for (std::size_t t = 0; t < n; ++t) g += dl[t] * col[t];
      ev.grad[static_cast<Eigen::Index>(k)] = g;
    }
    check(ev);
    return ev;
  }

 private:
  static void check(const Evaluation& ev) {
    if (!std::isfinite(ev.value) || !ev.grad.allFinite()) {
      fail(ErrorKind::non_finite_objective, "objective or gradient is not finite");
    }
  }

  std::span<const double> truth_;
  const ForecastMatrix& x_;
  Metric metric_;
  const MaseContext* mase_;
  double mase_scale_ = 1.0;
};

Eigen::VectorXd to_simplex(Eigen::VectorXd w) {
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::max(0.0, w[i]);
  const double s = w.sum();
  if (s > 0.0) w /= s;
  return w;
}

Eigen::VectorXd project(const Eigen::VectorXd& v) {
  const auto p = project_to_simplex(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
  return Eigen::Map<const Eigen::VectorXd>(p.values().data(), static_cast<Eigen::Index>(p.size()));
}

struct RunResult {
  Eigen::VectorXd w;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Armijo backtracking along w + alpha * d. Both endpoints are feasible, so
// every trial point is.
bool line_search(const Objective& f, const Eigen::VectorXd& w, const Evaluation& at,
                 const Eigen::VectorXd& d, Eigen::VectorXd& w_out, Evaluation& ev_out) {
  const double slope = at.grad.dot(d);
  double alpha = 1.0;
  for (int k = 0; k < 60; ++k) {
    Eigen::VectorXd trial = to_simplex(w + alpha * d);
    Evaluation ev = f(trial);
    const bool armijo = ev.value <= at.value + 1e-4 * alpha * std::min(slope, 0.0);
    if (armijo && ev.value <= at.value) {
      w_out = std::move(trial);
      ev_out = std::move(ev);
      return ev_out.value < at.value || slope < 0.0;
    }
    alpha *= 0.5;
  }
  return false;
}

RunResult sqp_run(const Objective& f, Eigen::VectorXd w, const OptimizerParams& params) {
  const auto m = w.size();
  RunResult out;
  Evaluation ev = f(w);
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(m, m);
  bool scaled = false;

  for (int k = 0; k < params.max_iterations; ++k) {
    out.iterations = k + 1;
    const Eigen::VectorXd c = ev.grad - b * w;
    Eigen::VectorXd d = detail::solve_simplex_qp(b, c, w) - w;
    if (d.cwiseAbs().maxCoeff() <= params.step_tolerance) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd w_next;
    Evaluation ev_next;
    bool moved = ev.grad.dot(d) < 0.0 && line_search(f, w, ev, d, w_next, ev_next);
    if (!moved) {
      // Kinks can leave the quasi-Newton direction without descent; fall back
      // to projected (sub)gradient steps of decreasing length.
      const double gnorm = ev.grad.norm();
      if (gnorm > 0.0) {
        for (double t = 1.0; t > 1e-10 && !moved; t *= 0.1) {
          Eigen::VectorXd pd = project(w - (t / gnorm) * ev.grad) - w;
          if (pd.cwiseAbs().maxCoeff() <= params.step_tolerance * 1e-2) continue;
          moved = line_search(f, w, ev, pd, w_next, ev_next);
          if (moved) d = pd;
        }
      }
    }
    if (!moved) {
      out.converged = true;
      break;
    }

    const Eigen::VectorXd s = w_next - w;
    const Eigen::VectorXd y = ev_next.grad - ev.grad;
    const double improvement = ev.value - ev_next.value;
    w = std::move(w_next);
    const double prev = ev.value;
    ev = std::move(ev_next);

    const double sy = s.dot(y);
    if (!scaled && sy > 0.0) {
      b = Eigen::MatrixXd::Identity(m, m) * (y.squaredNorm() / sy);
      scaled = true;
    }
    const Eigen::VectorXd bs = b * s;
    const double sbs = s.dot(bs);
    if (sbs > 1e-300) {
      // Powell-damped BFGS keeps B positive definite.
      Eigen::VectorXd r = y;
      if (sy < 0.2 * sbs) {
        const double theta = 0.8 * sbs / (sbs - sy);
        r = theta * y + (1.0 - theta) * bs;
      }
      const double sr = s.dot(r);
      if (sr > 1e-300) {
        b += (r * r.transpose()) / sr - (bs * bs.transpose()) / sbs;
        b = 0.5 * (b + b.transpose());
      }
    }

    if (std::abs(improvement) <= params.objective_tolerance * std::max(1.0, std::abs(prev)) &&
        s.cwiseAbs().maxCoeff() <= std::sqrt(params.step_tolerance)) {
      out.converged = true;
      break;
    }
  }
  out.w = std::move(w);
  out.value = ev.value;
  return out;
}

bool needs_multistart(Metric metric) {
  return metric != Metric::mse && metric != Metric::rmse;
}

}  // namespace

OptimizeResult optimize_weights(std::span<const double> truth, const ForecastMatrix& x,
                                Metric metric, const OptimizerParams& params,
                                const MaseContext* mase) {
  x.validate();
  if (truth.size() != x.horizon()) {
    fail(ErrorKind::length_mismatch, "truth length does not match forecast horizon");
  }
  if (params.max_iterations <= 0 || params.step_tolerance <= 0.0 ||
      params.objective_tolerance <= 0.0) {
    fail(ErrorKind::invalid_argument, "optimizer parameters must be positive");
  }
  require_finite(truth, "truth");
  const auto m = x.models();

  OptimizeResult result;
  result.weights = WeightVector::uniform(m);
  result.uniform_objective = ensemble_objective(truth, x, metric, result.weights.values(), mase);
  if (!std::isfinite(result.uniform_objective)) {
    fail(ErrorKind::non_finite_objective, "objective at uniform weights is not finite");
  }
  result.objective = result.uniform_objective;

  if (x.columns_identical()) {
    result.degenerate = true;
    result.converged = true;
    return result;
  }

  const Objective f(truth, x, metric, mase);
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m)));
  if (needs_multistart(metric)) {
    for (std::size_t i = 0; i < m; ++i) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
      v[static_cast<Eigen::Index>(i)] = 1.0;
      starts.push_back(std::move(v));
    }
  }

  std::vector<RunResult> runs;
  runs.reserve(starts.size());
  for (const auto& s : starts) runs.push_back(sqp_run(f, s, params));

  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) best = std::min(best, r.value);
  const double tol = params.objective_tolerance * std::max(1.0, std::abs(best));

  int chosen = -1;
  double chosen_entropy = -1.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    if (r.value > best + tol || r.value > result.uniform_objective) continue;
    const double h = WeightVector(std::vector<double>(r.w.data(), r.w.data() + r.w.size())).entropy();
    if (chosen < 0 || h > chosen_entropy + 1e-12) {
      chosen = static_cast<int>(i);
      chosen_entropy = h;
    }
  }
  result.starts = static_cast<int>(runs.size());
  if (chosen < 0) return result;  // no run beat the uniform start

  const auto& r = runs[static_cast<std::size_t>(chosen)];
  result.weights = WeightVector(std::vector<double>(r.w.data(), r.w.data() + r.w.size()));
  result.objective = ensemble_objective(truth, x, metric, result.weights.values(), mase);
  result.iterations = 0;
  for (const auto& run : runs) result.iterations += run.iterations;
  result.selected_start = chosen;
  result.converged = r.converged;
  if (result.objective > result.uniform_objective) {
    // Renormalisation drift; never report a result worse than the start.
    result.weights = WeightVector::uniform(m);
    result.objective = result.uniform_objective;
  }
  return result;
}

WeightVector project_to_simplex(std::span<const double> v) {
  if (v.empty()) fail(ErrorKind::invalid_argument, "cannot project an empty vector");
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorKind::non_finite_input, "projection input is not finite");
  }
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> w(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = std::max(v[i] - theta, 0.0);
    sum += w[i];
  }
  if (sum <= 0.0) return WeightVector::uniform(v.size());
  if (sum != 1.0) {
    for (auto& x : w) x /= sum;
  }
  return WeightVector(std::move(w));
}

std::size_t simplex_lattice_size(std::size_t m, double grid_step) {
  const auto k = static_cast<std::size_t>(std::llround(1.0 / grid_step));
  // C(k + m - 1, m - 1)
  std::size_t result = 1;
  for (std::size_t i = 1; i < m; ++i) result = result * (k + i) / i;
  return result;
}

BruteForceResult brute_force_weights(std::span<const double> truth, const ForecastMatrix& x,
                                     Metric metric, double grid_step, const MaseContext* mase) {
  x.validate();
  const auto m = x.models();
  if (m > 4) fail(ErrorKind::too_many_models, "brute-force oracle supports at most 4 models");
  if (!(grid_step > 0.0 && grid_step <= 0.1)) {
    fail(ErrorKind::invalid_argument, "grid_step must lie in (0, 0.1]");
  }
  const double kd = 1.0 / grid_step;
  const auto k = static_cast<int>(std::llround(kd));
  if (std::abs(kd - k) > 1e-6 * kd) {
    fail(ErrorKind::invalid_argument, "1/grid_step must be an integer");
  }

  BruteForceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  double best_entropy = -1.0;
  std::vector<int> counts(m, 0);
  std::vector<double> w(m, 0.0);

  auto visit = [&]() {
    for (std::size_t i = 0; i < m; ++i) w[i] = static_cast<double>(counts[i]) / k;
    const double value = ensemble_objective(truth, x, metric, w, mase);
    ++best.lattice_points;
    const double tol = 1e-12 * std::max(1.0, std::abs(best.objective));
    double entropy = 0.0;
    for (double v : w) {
      if (v > 0.0) entropy -= v * std::log(v);
    }
    if (value < best.objective - tol ||
        (std::abs(value - best.objective) <= tol && entropy > best_entropy + 1e-12)) {
      best.objective = value;
      best_entropy = entropy;
      best.weights = WeightVector(w);
    }
  };

  // Enumerate compositions of k into m non-negative parts.
  auto recurse = [&](auto&& self, std::size_t index, int remaining) -> void {
    if (index + 1 == m) {
      counts[index] = remaining;
      visit();
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[index] = c;
      self(self, index + 1, remaining - c);
    }
  };
  recurse(recurse, 0, k);
  return best;
}

}  // namespace ej
