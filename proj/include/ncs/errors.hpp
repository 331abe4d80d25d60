#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ncs {

enum class ErrorKind {
  kDimensionMismatch,
  kNotSymmetric,
  kNotPSD,
  kNotPD,
  kBadProbability,
  kNonFinite,
  kNeedPW,
  kSingularInnovation,
  kSingularGamma,
  kSingularOmega,
  kNotPositiveDefinite,
  kNoConvergence,
  kNotCertified,
  kScheduleMismatch,
  kCovNotConverged,
  kNotStable,
  kConfigError,
};

std::string_view to_string(ErrorKind kind);

/// True for failures that mean "the problem has no (stabilizing/unique)
/// solution", as opposed to malformed input.
bool is_mathematical_failure(ErrorKind kind);

class NcsError : public std::runtime_error {
 public:
  NcsError(ErrorKind kind, const std::string& detail, std::string field = {},
           int step = -1);

  ErrorKind kind() const { return kind_; }
  /// Offending field or matrix name, empty when not applicable.
  const std::string& field() const { return field_; }
  /// Time index at which the failure occurred, -1 when not applicable.
  int step() const { return step_; }

 private:
  ErrorKind kind_;
  std::string field_;
  int step_;
};

}  // namespace ncs
