#include "ej/error.h"

namespace ej {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::series_too_short: return "SeriesTooShort";
    case ErrorKind::non_finite_input: return "NonFiniteInput";
    case ErrorKind::insufficient_history: return "InsufficientHistory";
    case ErrorKind::length_mismatch: return "LengthMismatch";
    case ErrorKind::missing_quantiles: return "MissingQuantiles";
    case ErrorKind::zero_denominator: return "ZeroDenominator";
    case ErrorKind::non_finite_objective: return "NonFiniteObjective";
    case ErrorKind::too_many_models: return "TooManyModels";
    case ErrorKind::degenerate_correlation: return "DegenerateCorrelation";
    case ErrorKind::malformed_verdict: return "MalformedVerdict";
    case ErrorKind::remote_unavailable: return "RemoteUnavailable";
    case ErrorKind::timeout: return "Timeout";
    case ErrorKind::tie_in_oracle: return "TieInOracle";
    case ErrorKind::io_failure: return "IoFailure";
    case ErrorKind::config_error: return "ConfigError";
    case ErrorKind::data_error: return "DataError";
  }
  return "Unknown";
}

}  // namespace ej
