#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ej {

// Typed failure categories surfaced by the engine. Callers that need to map
// failures onto exit codes or audit markers switch on kind().
enum class ErrorKind {
  invalid_argument,
  series_too_short,
  non_finite_input,
  insufficient_history,
  length_mismatch,
  missing_quantiles,
  zero_denominator,
  non_finite_objective,
  too_many_models,
  degenerate_correlation,
  malformed_verdict,
  remote_unavailable,
  timeout,
  tie_in_oracle,
  io_failure,
  config_error,
  data_error,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace ej
