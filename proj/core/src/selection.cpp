#include "ej/selection.h"

#include <algorithm>
#include <cmath>

#include "ej/error.h"

namespace ej {

std::size_t oracle_label(std::span<const double> losses, bool* tied) {
  if (losses.empty()) fail(ErrorKind::invalid_argument, "loss row is empty");
  std::size_t best = 0;
  bool tie = false;
  for (std::size_t s = 0; s < losses.size(); ++s) {
    if (!std::isfinite(losses[s])) fail(ErrorKind::non_finite_input, "loss is not finite");
    if (s == 0) continue;
    if (losses[s] < losses[best]) {
      best = s;
      tie = false;
    } else if (losses[s] == losses[best]) {
      tie = true;
    }
  }
  if (tied) *tied = tie;
  return best;
}

SelectionResult selection_accuracy(const std::vector<std::vector<double>>& losses,
                                   const std::vector<std::size_t>& predictions) {
  if (losses.size() != predictions.size()) {
    fail(ErrorKind::length_mismatch, "one prediction per sample is required");
  }
  if (losses.empty()) fail(ErrorKind::invalid_argument, "no samples");
  SelectionResult out;
  out.samples = losses.size();
  const auto width = losses.front().size();
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (losses[i].size() != width) fail(ErrorKind::length_mismatch, "loss table is ragged");
    if (predictions[i] >= width) fail(ErrorKind::invalid_argument, "prediction index out of range");
    bool tied = false;
    const auto label = oracle_label(losses[i], &tied);
    out.ties += tied;
    out.oracle.push_back(label);
    out.matches += label == predictions[i];
  }
  out.accuracy = static_cast<double>(out.matches) / static_cast<double>(out.samples);
  return out;
}

SelectionGrid selection_grid(const std::vector<SelectionSample>& samples,
                             const std::vector<std::string>& evaluations) {
  SelectionGrid grid;
  grid.evaluations = evaluations;
  std::vector<std::vector<std::size_t>> matches;
  for (const auto& s : samples) {
    if (s.losses.size() != evaluations.size()) {
      fail(ErrorKind::length_mismatch, "sample lacks losses for every evaluation metric");
    }
    auto it = std::find(grid.groups.begin(), grid.groups.end(), s.group);
    std::size_t g;
    if (it == grid.groups.end()) {
      g = grid.groups.size();
      grid.groups.push_back(s.group);
      grid.counts.push_back(0);
      matches.emplace_back(evaluations.size(), 0);
    } else {
      g = static_cast<std::size_t>(it - grid.groups.begin());
    }
    ++grid.counts[g];
    for (std::size_t e = 0; e < evaluations.size(); ++e) {
      if (s.prediction >= s.losses[e].size()) {
        fail(ErrorKind::invalid_argument, "prediction index out of range");
      }
      matches[g][e] += oracle_label(s.losses[e]) == s.prediction;
    }
  }
  for (std::size_t g = 0; g < grid.groups.size(); ++g) {
    std::vector<double> row;
    for (auto m : matches[g]) row.push_back(static_cast<double>(m) / static_cast<double>(grid.counts[g]));
    grid.accuracy.push_back(std::move(row));
  }
  return grid;
}

}  // namespace ej
