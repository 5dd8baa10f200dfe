#include "ej/series.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ej/error.h"
#include "text_util.h"

namespace ej {

std::vector<Fold> make_folds(std::size_t length, int n_folds, std::size_t horizon,
                             std::size_t step) {
  if (n_folds < 1) fail(ErrorKind::invalid_argument, "n_folds must be >= 1");
  if (horizon == 0) fail(ErrorKind::invalid_argument, "horizon must be positive");
  if (step == 0) step = horizon;
  if (horizon > length) {
    fail(ErrorKind::insufficient_history,
         "horizon " + std::to_string(horizon) + " exceeds series length " +
             std::to_string(length));
  }
  const std::size_t last_end = length - horizon;
  const std::size_t span = step * static_cast<std::size_t>(n_folds - 1);
  // Every fold needs at least one training observation.
  if (span >= last_end) {
    fail(ErrorKind::insufficient_history,
         "series of length " + std::to_string(length) + " cannot hold " +
             std::to_string(n_folds) + " folds of horizon " + std::to_string(horizon));
  }
  std::vector<Fold> folds;
  folds.reserve(static_cast<std::size_t>(n_folds));
  for (int k = 0; k < n_folds; ++k) {
    const auto back = static_cast<std::size_t>(n_folds - 1 - k) * step;
    folds.push_back(Fold{last_end - back, horizon, k});
  }
  return folds;
}

std::vector<Fold> make_folds(const TimeSeries& series, int n_folds,
                             std::size_t horizon, std::size_t step) {
  return make_folds(series.size(), n_folds, horizon, step);
}

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorKind::non_finite_input,
           std::string(what) + " has a non-finite value at index " + std::to_string(i));
    }
  }
}

TimeSeries read_series_csv(const std::filesystem::path& path, int period,
                           std::string id) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::data_error, "cannot open series file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    fail(ErrorKind::data_error, "empty series file: " + path.string());
  }
  const auto header = detail::split_csv(detail::trim(line));
  if (header.size() < 2 || detail::trim(header[0]) != "timestamp" ||
      detail::trim(header[1]) != "value") {
    fail(ErrorKind::data_error,
         "expected header `timestamp,value` in " + path.string());
  }

  TimeSeries series;
  series.id = id.empty() ? path.stem().string() : std::move(id);
  series.period = period;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto cells = detail::split_csv(trimmed);
    if (cells.size() < 2) {
      fail(ErrorKind::data_error,
           path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    }
    double value = 0.0;
    if (!detail::parse_double(detail::trim(cells[1]), value)) {
      fail(ErrorKind::data_error, path.string() + ":" + std::to_string(line_no) +
                                      ": cannot parse value '" + cells[1] + "'");
    }
    series.values.push_back(value);
  }
  require_finite(series.values, path.string().c_str());
  return series;
}

}  // namespace ej
