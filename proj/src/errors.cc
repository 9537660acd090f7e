#include "lifetime_pd/errors.h"

namespace lifetime_pd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kEmptyCohortRow: return "EmptyCohortRow";
    case ErrorKind::kNonAbsorbingDefault: return "NonAbsorbingDefault";
    case ErrorKind::kOverflowGuard: return "OverflowGuard";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kSingularInnovation: return "SingularInnovation";
    case ErrorKind::kNoConvergence: return "NoConvergence";
    case ErrorKind::kNumericalDrift: return "NumericalDrift";
    case ErrorKind::kUsage: return "UsageError";
    case ErrorKind::kConfig: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

}  // namespace lifetime_pd
