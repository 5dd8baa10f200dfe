#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ej {

// Oracle label: argmin of realized losses over strategies. Exact ties go to the
// lowest strategy index (the fixed metric order).
std::size_t oracle_label(std::span<const double> losses, bool* tied = nullptr);

struct SelectionResult {
  double accuracy = 0.0;
  std::size_t samples = 0;
  std::size_t matches = 0;
  std::size_t ties = 0;
  std::vector<std::size_t> oracle;
};

// losses[sample][strategy], predictions[sample] = chosen strategy index.
SelectionResult selection_accuracy(const std::vector<std::vector<double>>& losses,
                                   const std::vector<std::size_t>& predictions);

struct SelectionSample {
  std::string group;  // e.g. domain
  std::vector<std::vector<double>> losses;  // [evaluation metric][strategy]
  std::size_t prediction = 0;
};

struct SelectionGrid {
  std::vector<std::string> groups;
  std::vector<std::string> evaluations;
  std::vector<std::vector<double>> accuracy;  // [group][evaluation]
  std::vector<std::size_t> counts;            // samples per group
};

// Per-group accuracy under each evaluation metric, groups in first-seen order.
SelectionGrid selection_grid(const std::vector<SelectionSample>& samples,
                             const std::vector<std::string>& evaluations);

}  // namespace ej
