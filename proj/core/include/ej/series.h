#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ej {

struct TimeSeries {
  std::string id;
  std::vector<double> values;
  int period = 1;  // seasonal period in samples

  std::size_t size() const noexcept { return values.size(); }
};

// One rolling-origin evaluation window: train on [0, train_end), forecast
// [train_end, train_end + horizon).
struct Fold {
  std::size_t train_end = 0;
  std::size_t horizon = 0;
  int index = 0;

  std::size_t target_begin() const noexcept { return train_end; }
  std::size_t target_end() const noexcept { return train_end + horizon; }
};

// Rolling-origin schedule ending at the last observation. Consecutive
// train_end values differ by `step`; step = 0 means step = horizon
// (non-overlapping forecast windows). Folds are ordered by train_end.
std::vector<Fold> make_folds(std::size_t length, int n_folds, std::size_t horizon,
                             std::size_t step = 0);
std::vector<Fold> make_folds(const TimeSeries& series, int n_folds,
                             std::size_t horizon, std::size_t step = 0);

// Throws NonFiniteInput when any value is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

// Reads a `timestamp,value` CSV (header required, chronological rows).
TimeSeries read_series_csv(const std::filesystem::path& path, int period,
                           std::string id = {});

}  // namespace ej
