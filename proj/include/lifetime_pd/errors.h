#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lifetime_pd {

/// Failure categories surfaced by the engine. The CLI prints the category
/// name and maps it to an exit status.
enum class ErrorKind {
  kInvalidArgument,
  kEmptyCohortRow,
  kNonAbsorbingDefault,
  kOverflowGuard,
  kDimensionMismatch,
  kLengthMismatch,
  kSingularInnovation,
  kNoConvergence,
  kNumericalDrift,
  kUsage,
  kConfig,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Throws Error(kind, message) unless `condition` holds.
inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace lifetime_pd
