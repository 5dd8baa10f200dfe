#include "bundle.h"

#include <charconv>
#include <fstream>

#include "ej/error.h"

namespace ej::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool to_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void data_fail(const std::filesystem::path& path, const std::string& msg) {
  fail(ErrorKind::data_error, path.string() + ": " + msg);
}

}  // namespace

ModelForecast read_forecast_csv(const std::filesystem::path& path, std::size_t horizon) {
  std::ifstream in(path);
  if (!in) data_fail(path, "missing forecast file");

  std::string line;
  if (!std::getline(in, line)) data_fail(path, "empty forecast file");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "step" || header[1] != "point") {
    data_fail(path, "expected header starting with `step,point`");
  }
  std::vector<double> levels;
  for (std::size_t c = 2; c < header.size(); ++c) {
    double level = 0.0;
    if (header[c].rfind("q_", 0) != 0 || !to_double(header[c].substr(2), level)) {
      data_fail(path, "bad quantile column '" + std::string(header[c]) + "'");
    }
    levels.push_back(level);
  }

  ModelForecast fc;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      data_fail(path, "line " + std::to_string(line_no) + ": expected " +
                          std::to_string(header.size()) + " columns");
    }
    double step = 0.0;
    if (!to_double(cells[0], step) || step != static_cast<double>(fc.point.size())) {
      data_fail(path, "line " + std::to_string(line_no) + ": steps must count up from 0");
    }
    std::vector<double> values(cells.size() - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (!to_double(cells[c], values[c - 1])) {
        data_fail(path, "line " + std::to_string(line_no) + ": cannot parse '" +
                            std::string(cells[c]) + "'");
      }
    }
    fc.point.push_back(values[0]);
    if (!levels.empty()) rows.emplace_back(values.begin() + 1, values.end());
  }
  if (fc.point.size() != horizon) {
    data_fail(path, "has " + std::to_string(fc.point.size()) + " steps, fold horizon is " +
                        std::to_string(horizon));
  }
  try {
    require_finite(fc.point, "point forecast");
    if (!levels.empty()) fc.quantiles = QuantileForecast::ingest(std::move(levels), std::move(rows));
  } catch (const Error& e) {
    data_fail(path, e.what());
  }
  return fc;
}

ForecastBundle load_bundle(const std::filesystem::path& dir,
                           const std::vector<std::string>& model_ids,
                           const std::vector<Fold>& folds) {
  ForecastBundle b;
  b.model_ids = model_ids;
  b.forecasts.resize(folds.size());
  for (std::size_t k = 0; k < folds.size(); ++k) {
    for (const auto& id : model_ids) {
      const auto file = dir / id / ("fold_" + std::to_string(folds[k].index) + ".csv");
      b.forecasts[k].push_back(read_forecast_csv(file, folds[k].horizon));
    }
  }
  return b;
}

}  // namespace ej::cli
