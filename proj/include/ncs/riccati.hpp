#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncs/errors.hpp"
#include "ncs/linalg.hpp"
#include "ncs/model.hpp"

namespace ncs {

/// Quantities of the coupled backward recursion at time k. Gamma, M, Omega
/// and L are formed from the k+1 values; P_W, P_P, Delta are the k values.
struct RiccatiStep {
  Matrix P_W;
  Matrix P_P;
  Matrix Delta;
  Matrix Gamma;
  Matrix M;
  Matrix Omega;
  Matrix L;
  int k = 0;
};

/// Finite-horizon solution. steps[k] holds time k for k = 0..N; the terminal
/// weight P_{N+1} (shared by P^W and P^P) is kept alongside.
struct RiccatiSchedule {
  std::vector<RiccatiStep> steps;
  Matrix P_terminal;
  double p = 0.0;

  std::size_t horizon() const { return steps.empty() ? 0 : steps.size() - 1; }
  /// P^W_{k+1}, P^P_{k+1}, Delta_{k+1}; for k = N these are terminal values.
  const Matrix& P_W_next(std::size_t k) const;
  const Matrix& P_P_next(std::size_t k) const;
  Matrix Delta_next(std::size_t k) const;
};

/// One backward step from (P^W_{k+1}, P^P_{k+1}). Throws
/// NotPositiveDefinite(k, "Gamma"|"Omega") when a pivot falls below 1e-12.
RiccatiStep riccati_step(const AugmentedSpec& spec, const Matrix& P_W_next,
                         const Matrix& P_P_next, int k);

/// Backward recursion from P_{N+1} = spec.P_terminal down to k = 0.
RiccatiSchedule finite_horizon_recursion(const AugmentedSpec& spec);

struct AreCertificates {
  bool P_W_pd = false;
  bool Delta_pd = false;
  /// Reported only; the stabilization results do not gate on it.
  bool P_P_pd = false;
  bool spectral_ok = false;
  /// sqrt(p) * spectral radius of A - B_P Omega^{-1} L.
  double spectral_value = 0.0;
};

struct AreSolution {
  Matrix P_W;
  Matrix P_P;
  Matrix Delta;
  Matrix Gamma;
  Matrix M;
  Matrix Omega;
  Matrix L;
  std::size_t iterations = 0;
  double residual_W = 0.0;
  double residual_P = 0.0;
  AreCertificates certificates;
};

inline constexpr double kDefaultAreTolerance = 1e-10;
inline constexpr std::size_t kDefaultAreMaxIter = 100000;

/// Fixed point of the coupled algebraic Riccati pair, obtained as the limit
/// of the zero-terminal backward recursion over a growing horizon. Stops when
/// max(||dP^W||_F, ||dP^P||_F) < tol. Throws NoConvergence (including on
/// overflow) or NotPositiveDefinite.
AreSolution solve_are(const AugmentedSpec& spec,
                      double tol = kDefaultAreTolerance,
                      std::size_t max_iter = kDefaultAreMaxIter);

/// Fills Gamma, M, Omega, L, Delta, residuals and certificates from P^W, P^P.
AreSolution complete_are_solution(const AugmentedSpec& spec, Matrix P_W,
                                  Matrix P_P, std::size_t iterations);

/// Frobenius defects of the two algebraic equations at (P_W, P_P).
std::pair<double, double> are_residuals(const AugmentedSpec& spec,
                                        const Matrix& P_W, const Matrix& P_P);

/// Outcome of an ARE solve that may have failed.
struct AreAttempt {
  std::optional<AreSolution> solution;
  std::optional<ErrorKind> failure;
  std::string message;
};

AreAttempt attempt_are(const AugmentedSpec& spec,
                       double tol = kDefaultAreTolerance,
                       std::size_t max_iter = kDefaultAreMaxIter);

struct UniquenessReport {
  bool a1 = false;
  bool a2 = false;
  bool a3 = false;
  bool bp_stabilizable = false;
  bool ad_observable = false;
  bool certified = false;
  std::vector<std::string> details;
};

/// Sufficient conditions for the positive solution pair to be unique.
UniquenessReport uniqueness_check(const ValidatedSpec& spec,
                                  const AreSolution& sol);

enum class VerdictKind { kStabilizable, kBounded, kNegative };

std::string_view to_string(VerdictKind kind);

struct Verdict {
  VerdictKind kind = VerdictKind::kNegative;
  /// Name of the failing certificate (or ARE failure) when negative.
  std::string failing_certificate;
  std::string detail;
};

/// Noiseless: STABILIZABLE iff the ARE converged with P^W > 0 and Delta > 0.
/// Noisy: BOUNDED iff additionally the spectral certificate holds.
Verdict stabilization_verdict(const AreAttempt& attempt,
                              bool with_additive_noise);

}  // namespace ncs
