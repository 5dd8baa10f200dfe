#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ej/series.h"

namespace ej {

enum class Component : std::uint8_t { trend = 0, seasonality = 1, residual = 2 };

inline constexpr std::array<Component, 3> kComponents = {
    Component::trend, Component::seasonality, Component::residual};

std::string_view to_string(Component c) noexcept;
Component component_from_string(std::string_view name);

// One of the eight coalitions over {Trend, Seasonality, Residual}, stored as a
// bit mask (T = 1, S = 2, R = 4).
class ComponentSubset {
 public:
  constexpr ComponentSubset() = default;
  static constexpr ComponentSubset from_mask(unsigned mask) {
    return ComponentSubset(static_cast<std::uint8_t>(mask & 7u));
  }
  static constexpr ComponentSubset empty() { return ComponentSubset(0); }
  static constexpr ComponentSubset full() { return ComponentSubset(7); }

  constexpr unsigned mask() const noexcept { return mask_; }
  constexpr bool contains(Component c) const noexcept {
    return (mask_ >> static_cast<unsigned>(c)) & 1u;
  }
  constexpr ComponentSubset with(Component c) const noexcept {
    return ComponentSubset(static_cast<std::uint8_t>(mask_ | (1u << static_cast<unsigned>(c))));
  }
  constexpr int size() const noexcept {
    return (mask_ & 1u) + ((mask_ >> 1) & 1u) + ((mask_ >> 2) & 1u);
  }
  constexpr bool operator==(const ComponentSubset&) const = default;

 private:
  constexpr explicit ComponentSubset(std::uint8_t m) : mask_(m) {}
  std::uint8_t mask_ = 0;
};

// Label in the {∅, T, S, R, TS, TR, SR, TSR} notation ("" for the empty set).
std::string subset_label(ComponentSubset s);

struct DecompositionParams {
  int seasonal_window = 0;   // 0 = periodic (cycle-subseries means)
  int seasonal_degree = 0;   // loess degree for non-periodic seasonal smoothing
  int trend_window = 0;      // 0 = derived from period and seasonal window
  int lowpass_window = 0;    // 0 = next odd >= period
  int inner_iterations = 2;
  int robust_iterations = 1;
};

struct Decomposition {
  std::vector<double> trend;
  std::vector<double> seasonal;
  std::vector<double> residual;

  std::size_t size() const noexcept { return trend.size(); }
  std::span<const double> component(Component c) const;
  // Contiguous slice [begin, begin + length) of every component.
  Decomposition slice(std::size_t begin, std::size_t length) const;
};

// Additive STL. Residual is computed last as values - trend - seasonal so the
// reconstruction is exact up to rounding. The seasonal component is centred
// to zero mean over every full period, with the offset moved into the trend.
Decomposition decompose(std::span<const double> values, int period,
                        const DecompositionParams& params = {});
Decomposition decompose(const TimeSeries& series, const DecompositionParams& params = {});

// Sum of the components in `subset`; the empty subset yields zeros.
std::vector<double> reconstruct_subset(const Decomposition& decomp, ComponentSubset subset);

// Strength-of-component measures in [0, 1]:
// 1 - Var(R) / Var(S + R) and 1 - Var(R) / Var(T + R).
double seasonal_strength(const Decomposition& decomp);
double trend_strength(const Decomposition& decomp);

// Local regression at abscissa x over samples y[0..n) with integer abscissae,
// window of `q` nearest points, tricube kernel times optional robustness
// weights. Exposed for tests.
double loess_at(std::span<const double> y, std::span<const double> robustness, double x,
                int q, int degree);

}  // namespace ej
