#include "ncs/errors.hpp"

namespace ncs {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNotSymmetric: return "NotSymmetric";
    case ErrorKind::kNotPSD: return "NotPSD";
    case ErrorKind::kNotPD: return "NotPD";
    case ErrorKind::kBadProbability: return "BadProbability";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kNeedPW: return "NeedPW";
    case ErrorKind::kSingularInnovation: return "SingularInnovation";
    case ErrorKind::kSingularGamma: return "SingularGamma";
    case ErrorKind::kSingularOmega: return "SingularOmega";
    case ErrorKind::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::kNoConvergence: return "NoConvergence";
    case ErrorKind::kNotCertified: return "NotCertified";
    case ErrorKind::kScheduleMismatch: return "ScheduleMismatch";
    case ErrorKind::kCovNotConverged: return "CovNotConverged";
    case ErrorKind::kNotStable: return "NotStable";
    case ErrorKind::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

bool is_mathematical_failure(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSingularInnovation:
    case ErrorKind::kSingularGamma:
    case ErrorKind::kSingularOmega:
    case ErrorKind::kNotPositiveDefinite:
    case ErrorKind::kNoConvergence:
    case ErrorKind::kNotCertified:
    case ErrorKind::kCovNotConverged:
    case ErrorKind::kNotStable:
      return true;
    default:
      return false;
  }
}

namespace {

std::string compose(ErrorKind kind, const std::string& detail,
                    const std::string& field, int step) {
  std::string out(to_string(kind));
  if (!field.empty()) out += "(" + field + ")";
  if (step >= 0) out += " at k=" + std::to_string(step);
  if (!detail.empty()) out += ": " + detail;
  return out;
}

}  // namespace

NcsError::NcsError(ErrorKind kind, const std::string& detail, std::string field,
                   int step)
    : std::runtime_error(compose(kind, detail, field, step)),
      kind_(kind),
      field_(std::move(field)),
      step_(step) {}

}  // namespace ncs
