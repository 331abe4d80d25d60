#include "ncs/controller.hpp"

#include <string>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

StageGains stage_from(const Matrix& Gamma, const Matrix& M, const Matrix& Omega,
                      const Matrix& L, int k) {
  const auto gamma_llt = factor_positive_definite(Gamma);
  if (!gamma_llt) {
    throw NcsError(ErrorKind::kSingularGamma, "Gamma is not positive definite",
                   "Gamma", k);
  }
  const auto omega_llt = factor_positive_definite(Omega);
  if (!omega_llt) {
    throw NcsError(ErrorKind::kSingularOmega, "Omega is not positive definite",
                   "Omega", k);
  }
  const Eigen::Index q = Omega.rows();
  const Eigen::Index w = Gamma.rows() - q;
  const Matrix stacked = gamma_llt->solve(M);
  return StageGains{stacked.topRows(w), stacked.bottomRows(q),
                    omega_llt->solve(L)};
}

}  // namespace

const StageGains& GainSchedule::at(std::size_t k) const {
  if (steps.empty()) {
    throw NcsError(ErrorKind::kScheduleMismatch, "empty gain schedule");
  }
  if (stationary) return steps.front();
  if (k >= steps.size()) {
    throw NcsError(ErrorKind::kScheduleMismatch,
                   "no gains for k=" + std::to_string(k) + " (horizon " +
                       std::to_string(horizon) + ")");
  }
  return steps[k];
}

GainSchedule synthesize_finite(const RiccatiSchedule& schedule) {
  GainSchedule out;
  out.horizon = schedule.horizon();
  out.stationary = false;
  out.steps.reserve(schedule.steps.size());
  for (const RiccatiStep& st : schedule.steps) {
    out.steps.push_back(stage_from(st.Gamma, st.M, st.Omega, st.L, st.k));
  }
  return out;
}

GainSchedule synthesize_stationary(const AreSolution& sol) {
  if (!sol.certificates.P_W_pd || !sol.certificates.Delta_pd) {
    throw NcsError(ErrorKind::kNotCertified,
                   "stationary gains need P^W > 0 and Delta > 0");
  }
  GainSchedule out;
  out.stationary = true;
  out.steps.push_back(stage_from(sol.Gamma, sol.M, sol.Omega, sol.L, -1));
  return out;
}

double stage_trace_term(const ValidatedSpec& spec, const Matrix& Sigma_P_filt,
                        const Matrix& gain_next, const Matrix& Delta_next,
                        const Matrix& P_P_next) {
  const SystemSpec& s = spec.spec();
  const Eigen::Index n = spec.n();
  const double p = s.p;
  const Matrix& A = s.A;
  const Matrix I_GH = Matrix::Identity(n, n) - gain_next * s.H;
  const Matrix A_GHA = I_GH * A;
  const Matrix state_weight = A.transpose() * Delta_next * A + s.Q -
                              p * A_GHA.transpose() * P_P_next * A_GHA;
  const Matrix noise_weight =
      Delta_next - p * I_GH.transpose() * P_P_next * I_GH;
  const Matrix obs_weight = gain_next.transpose() * P_P_next * gain_next;
  return (Sigma_P_filt * state_weight).trace() +
         (s.Q_omega * noise_weight).trace() -
         p * (s.Q_v * obs_weight).trace();
}

double initial_cost_term(const ValidatedSpec& spec, const Matrix& P_W0,
                         const Matrix& P_P0, const CovarianceStep& cov0) {
  const SystemSpec& s = spec.spec();
  const double p = s.p;
  const Matrix mean_outer = s.mu * s.mu.transpose();
  // x^W_{0|0} = x_0 w.p. 1-p, mu otherwise; x^P_{0|0} - x^W_{0|0} is nonzero
  // only on dropout, where it equals G(H(x_0 - mu) + v_0).
  const double remote =
      (P_W0 * ((1.0 - p) * (mean_outer + s.sigma) + p * mean_outer)).trace();
  const double embedded = p * (P_P0 * (s.sigma - cov0.Sigma_PP)).trace();
  return remote + embedded;
}

CostReport analytic_cost_finite(const ValidatedSpec& spec,
                                const RiccatiSchedule& schedule,
                                const CovarianceSchedule& cov) {
  const std::size_t N = schedule.horizon();
  if (schedule.steps.empty() || N != spec->N) {
    throw NcsError(ErrorKind::kScheduleMismatch,
                   "Riccati schedule horizon differs from the spec");
  }
  if (cov.size() < N + 2) {
    throw NcsError(ErrorKind::kScheduleMismatch,
                   "covariance schedule must cover k = 0..N+1");
  }
  CostReport report;
  report.terms.initial = initial_cost_term(spec, schedule.steps[0].P_W,
                                           schedule.steps[0].P_P, cov[0]);
  report.terms.per_step.reserve(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    report.terms.per_step.push_back(stage_trace_term(
        spec, cov[k].Sigma_P_filt, cov[k + 1].gain_G, schedule.Delta_next(k),
        schedule.P_P_next(k)));
  }
  report.terms.terminal =
      (cov[N + 1].Sigma_P_filt * schedule.P_terminal).trace();

  report.analytic = report.terms.initial + report.terms.terminal;
  for (double t : report.terms.per_step) report.analytic += t;
  return report;
}

CostReport analytic_cost_stationary(const ValidatedSpec& spec,
                                    const AreSolution& sol,
                                    const CovarianceLimit& limit) {
  CostReport report;
  const double stage =
      stage_trace_term(spec, limit.step.Sigma_P_filt, limit.step.gain_G,
                       sol.Delta, sol.P_P);
  report.terms.per_step.push_back(stage);
  report.analytic = stage;
  return report;
}

CostReport analytic_cost_noiseless(const ValidatedSpec& spec,
                                   const AreSolution& sol, double tol,
                                   std::size_t max_iter) {
  if (!spec->Q_omega.isZero(0.0)) {
    throw NcsError(ErrorKind::kConfigError,
                   "total infinite-horizon cost is finite only for Q_omega=0",
                   "Q_omega");
  }
  CostReport report;
  CovarianceStep current = covariance_update(spec, spec->sigma);
  report.terms.initial = initial_cost_term(spec, sol.P_W, sol.P_P, current);
  report.analytic = report.terms.initial;
  for (std::size_t k = 0; k < max_iter; ++k) {
    CovarianceStep next = covariance_update(
        spec, symmetrize(spec->A * current.Sigma_P_filt * spec->A.transpose() +
                         spec->Q_omega));
    const double term = stage_trace_term(spec, current.Sigma_P_filt,
                                         next.gain_G, sol.Delta, sol.P_P);
    report.terms.per_step.push_back(term);
    report.analytic += term;
    current = std::move(next);
    if (std::abs(term) < tol && current.Sigma_P_filt.norm() < tol) {
      return report;
    }
  }
  throw NcsError(ErrorKind::kCovNotConverged,
                 "stage terms did not vanish within " +
                     std::to_string(max_iter) + " steps");
}

}  // namespace ncs
