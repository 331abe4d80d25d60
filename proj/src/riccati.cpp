#include "ncs/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ncs {
namespace {

Eigen::LLT<Matrix> factor_or_throw(const Matrix& X, const char* which, int k) {
  auto llt = factor_positive_definite(X);
  if (!llt) {
    throw NcsError(ErrorKind::kNotPositiveDefinite,
                   std::string(which) + " has a pivot below 1e-12", which, k);
  }
  return *std::move(llt);
}

Matrix delta_of(double p, const Matrix& P_W, const Matrix& P_P) {
  return (1.0 - p) * P_W + p * P_P;
}

}  // namespace

const Matrix& RiccatiSchedule::P_W_next(std::size_t k) const {
  return k + 1 < steps.size() ? steps[k + 1].P_W : P_terminal;
}

const Matrix& RiccatiSchedule::P_P_next(std::size_t k) const {
  return k + 1 < steps.size() ? steps[k + 1].P_P : P_terminal;
}

Matrix RiccatiSchedule::Delta_next(std::size_t k) const {
  return k + 1 < steps.size() ? steps[k + 1].Delta
                              : delta_of(p, P_terminal, P_terminal);
}

RiccatiStep riccati_step(const AugmentedSpec& spec, const Matrix& P_W_next,
                         const Matrix& P_P_next, int k) {
  const SystemSpec& s = spec.spec();
  const Matrix& A = s.A;
  const Matrix& B = spec.B;
  const Matrix& BP = s.B_P;
  const Matrix Delta_next = delta_of(s.p, P_W_next, P_P_next);

  RiccatiStep step;
  step.k = k;
  step.Gamma = symmetrize(B.transpose() * P_W_next * B + spec.R);
  step.M = B.transpose() * P_W_next * A;
  step.Omega = symmetrize(BP.transpose() * Delta_next * BP + s.R_P);
  step.L = BP.transpose() * Delta_next * A;

  const auto gamma_llt = factor_or_throw(step.Gamma, "Gamma", k);
  const auto omega_llt = factor_or_throw(step.Omega, "Omega", k);

  step.P_W = symmetrize(A.transpose() * P_W_next * A -
                        step.M.transpose() * gamma_llt.solve(step.M) + s.Q);
  step.P_P = symmetrize(A.transpose() * Delta_next * A -
                        step.L.transpose() * omega_llt.solve(step.L) + s.Q);
  step.Delta = delta_of(s.p, step.P_W, step.P_P);
  return step;
}

RiccatiSchedule finite_horizon_recursion(const AugmentedSpec& spec) {
  const SystemSpec& s = spec.spec();
  RiccatiSchedule out;
  out.P_terminal = s.P_terminal;
  out.p = s.p;
  out.steps.resize(s.N + 1);
  Matrix P_W = s.P_terminal;
  Matrix P_P = s.P_terminal;
  for (int k = static_cast<int>(s.N); k >= 0; --k) {
    out.steps[k] = riccati_step(spec, P_W, P_P, k);
    P_W = out.steps[k].P_W;
    P_P = out.steps[k].P_P;
  }
  return out;
}

std::pair<double, double> are_residuals(const AugmentedSpec& spec,
                                        const Matrix& P_W, const Matrix& P_P) {
  const RiccatiStep rhs = riccati_step(spec, P_W, P_P, 0);
  return {(rhs.P_W - P_W).norm(), (rhs.P_P - P_P).norm()};
}

AreSolution complete_are_solution(const AugmentedSpec& spec, Matrix P_W,
                                  Matrix P_P, std::size_t iterations) {
  const SystemSpec& s = spec.spec();
  const RiccatiStep fixed = riccati_step(spec, P_W, P_P, 0);

  AreSolution sol;
  sol.Delta = delta_of(s.p, P_W, P_P);
  sol.Gamma = fixed.Gamma;
  sol.M = fixed.M;
  sol.Omega = fixed.Omega;
  sol.L = fixed.L;
  sol.residual_W = (fixed.P_W - P_W).norm();
  sol.residual_P = (fixed.P_P - P_P).norm();
  sol.iterations = iterations;

  AreCertificates& c = sol.certificates;
  c.P_W_pd = is_positive_definite(P_W);
  c.Delta_pd = is_positive_definite(sol.Delta);
  c.P_P_pd = is_positive_definite(P_P);
  const Matrix K_tilde = factor_or_throw(sol.Omega, "Omega", 0).solve(sol.L);
  c.spectral_value = std::sqrt(s.p) * spectral_radius(s.A - s.B_P * K_tilde);
  c.spectral_ok = c.spectral_value < 1.0;

  sol.P_W = std::move(P_W);
  sol.P_P = std::move(P_P);
  return sol;
}

AreSolution solve_are(const AugmentedSpec& spec, double tol,
                      std::size_t max_iter) {
  if (!(tol > 0.0)) {
    throw NcsError(ErrorKind::kConfigError, "tolerance must be positive",
                   "tol");
  }
  const Eigen::Index n = spec.n();
  Matrix P_W = Matrix::Zero(n, n);
  Matrix P_P = Matrix::Zero(n, n);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    RiccatiStep step = riccati_step(spec, P_W, P_P, 0);
    if (!step.P_W.allFinite() || !step.P_P.allFinite()) {
      throw NcsError(ErrorKind::kNoConvergence,
                     "value iteration overflowed after " + std::to_string(it) +
                         " iterations");
    }
    const double change =
        std::max((step.P_W - P_W).norm(), (step.P_P - P_P).norm());
    P_W = std::move(step.P_W);
    P_P = std::move(step.P_P);
    if (change < tol) {
      return complete_are_solution(spec, std::move(P_W), std::move(P_P), it);
    }
  }
  throw NcsError(ErrorKind::kNoConvergence,
                 "no fixed point within " + std::to_string(max_iter) +
                     " iterations");
}

AreAttempt attempt_are(const AugmentedSpec& spec, double tol,
                       std::size_t max_iter) {
  AreAttempt out;
  try {
    out.solution = solve_are(spec, tol, max_iter);
  } catch (const NcsError& e) {
    out.failure = e.kind();
    out.message = e.what();
  }
  return out;
}

UniquenessReport uniqueness_check(const ValidatedSpec& spec,
                                  const AreSolution& sol) {
  const AssumptionReport base = check_assumptions(spec, sol.P_W);
  UniquenessReport r;
  r.a1 = base.a1_weights_ok;
  r.a2 = base.a2_observable_detectable;
  r.a3 = base.a3_stabilizable_pair;
  r.bp_stabilizable =
      pbh_controllability(spec->A, spec->B_P, /*unstable_only=*/true).passed;
  const Matrix target = assumption4_target(spec, sol.P_W);
  if (is_positive_semidefinite(target)) {
    const double floor = -1e-10 * std::max(1.0, target.norm());
    const Matrix root = psd_square_root_factor(target, floor);
    r.ad_observable =
        pbh_observability(spec->A, root.transpose(), /*unstable_only=*/false)
            .passed;
  }
  r.certified = r.a1 && r.a2 && r.a3 && r.bp_stabilizable && r.ad_observable;
  r.details = base.details;
  return r;
}

std::string_view to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::kStabilizable: return "STABILIZABLE";
    case VerdictKind::kBounded: return "BOUNDED";
    case VerdictKind::kNegative: return "NEGATIVE";
  }
  return "NEGATIVE";
}

Verdict stabilization_verdict(const AreAttempt& attempt,
                              bool with_additive_noise) {
  Verdict v;
  if (!attempt.solution) {
    v.failing_certificate =
        attempt.failure ? std::string(to_string(*attempt.failure))
                        : std::string("NoSolution");
    v.detail = attempt.message;
    return v;
  }
  const AreCertificates& c = attempt.solution->certificates;
  if (!c.P_W_pd) {
    v.failing_certificate = "P_W_pd";
    v.detail = "P^W is not positive definite";
    return v;
  }
  if (!c.Delta_pd) {
    v.failing_certificate = "Delta_pd";
    v.detail = "Delta is not positive definite";
    return v;
  }
  if (!with_additive_noise) {
    v.kind = VerdictKind::kStabilizable;
    return v;
  }
  if (!c.spectral_ok) {
    v.failing_certificate = "spectral_ok";
    v.detail = "sqrt(p)*rho(A - B_P Omega^-1 L) = " +
               std::to_string(c.spectral_value) + " >= 1";
    return v;
  }
  v.kind = VerdictKind::kBounded;
  return v;
}

}  // namespace ncs
