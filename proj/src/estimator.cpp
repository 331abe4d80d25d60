#include "ncs/estimator.hpp"

#include <algorithm>
#include <string>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

void require_length(const Vector& v, Eigen::Index n, const char* name) {
  if (v.size() != n) {
    throw NcsError(ErrorKind::kDimensionMismatch,
                   "expected length " + std::to_string(n) + ", got " +
                       std::to_string(v.size()),
                   name);
  }
}

Matrix predicted_covariance(const ValidatedSpec& spec,
                            const Matrix& Sigma_P_filt) {
  return symmetrize(spec->A * Sigma_P_filt * spec->A.transpose() +
                    spec->Q_omega);
}

Matrix innovation_gain(const Matrix& K_tilde, const Matrix& B_P,
                       const Matrix& A) {
  return A - B_P * K_tilde;
}

Matrix omega_solve(const Matrix& Omega, const Matrix& L) {
  const auto llt = factor_positive_definite(Omega);
  if (!llt) {
    throw NcsError(ErrorKind::kSingularOmega,
                   "Omega is not positive definite");
  }
  return llt->solve(L);
}

Matrix remote_covariance_step(const ValidatedSpec& spec, const Matrix& K_tilde,
                              const Matrix& Sigma_W_prev,
                              const Matrix& Sigma_P_prev) {
  const SystemSpec& s = spec.spec();
  const Matrix closed = innovation_gain(K_tilde, s.B_P, s.A);
  const Matrix BK = s.B_P * K_tilde;
  const Matrix next =
      s.p * (closed * Sigma_W_prev * closed.transpose() +
             BK * Sigma_P_prev * closed.transpose() +
             s.A * Sigma_P_prev * BK.transpose() + s.Q_omega);
  return symmetrize(next);
}

}  // namespace

CovarianceStep covariance_update(const ValidatedSpec& spec,
                                 const Matrix& Sigma_P_pred) {
  const SystemSpec& s = spec.spec();
  const Eigen::Index n = spec.n();
  const Matrix S = s.H * Sigma_P_pred * s.H.transpose() + s.Q_v;
  const auto llt = factor_positive_definite(S);
  if (!llt) {
    throw NcsError(ErrorKind::kSingularInnovation,
                   "H Sigma H' + Q_v is not positive definite");
  }
  // G = Sigma H' S^{-1}  <=>  G' = S^{-1} H Sigma.
  Matrix G = llt->solve(s.H * Sigma_P_pred).transpose();
  const Matrix IGH = Matrix::Identity(n, n) - G * s.H;
  CovarianceStep step;
  step.Sigma_P_pred = Sigma_P_pred;
  step.Sigma_PP = symmetrize(IGH * Sigma_P_pred * IGH.transpose() +
                             G * s.Q_v * G.transpose());
  step.Sigma_P_filt = s.p * step.Sigma_PP;
  step.gain_G = std::move(G);
  return step;
}

CovarianceSchedule covariance_schedule(const ValidatedSpec& spec,
                                       std::size_t horizon) {
  CovarianceSchedule out;
  out.reserve(horizon + 1);
  out.push_back(covariance_update(spec, spec->sigma));
  for (std::size_t k = 1; k <= horizon; ++k) {
    out.push_back(covariance_update(
        spec, predicted_covariance(spec, out.back().Sigma_P_filt)));
  }
  return out;
}

CovarianceLimit covariance_limit(const ValidatedSpec& spec, double tol,
                                 std::size_t max_iter) {
  CovarianceStep current = covariance_update(spec, spec->sigma);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    CovarianceStep next = covariance_update(
        spec, predicted_covariance(spec, current.Sigma_P_filt));
    const double change = (next.Sigma_P_filt - current.Sigma_P_filt).norm();
    if (!next.Sigma_P_filt.allFinite()) break;
    current = std::move(next);
    if (change < tol * std::max(1.0, current.Sigma_P_filt.norm()))
      return CovarianceLimit{std::move(current), it, change};
  }
  throw NcsError(ErrorKind::kCovNotConverged,
                 "Sigma^P_{k|k} did not settle within " +
                     std::to_string(max_iter) + " iterations");
}

RemoteFilterState remote_prior(const AugmentedSpec& spec) {
  RemoteFilterState st;
  st.x_hat_W_pred = spec.spec().mu;
  st.x_hat_W_filt = spec.spec().mu;
  st.k = -1;
  return st;
}

EmbeddedFilterState embedded_prior(const AugmentedSpec& spec) {
  const Eigen::Index n = spec.n();
  EmbeddedFilterState st;
  st.x_hat_P_pred = spec.spec().mu;
  st.x_hat_P_filt = spec.spec().mu;
  st.x_hat_PP = spec.spec().mu;
  st.Sigma_P_pred = spec.spec().sigma;
  st.Sigma_P_filt = Matrix::Zero(n, n);
  st.Sigma_PP = Matrix::Zero(n, n);
  st.gain_G = Matrix::Zero(n, spec.m());
  st.k = -1;
  return st;
}

void advance_remote(RemoteFilterState& state, bool gamma, const Vector& x_true,
                    const Vector& u_prev, const AugmentedSpec& spec) {
  const SystemSpec& s = spec.spec();
  require_length(x_true, spec.n(), "x_true");
  if (state.k < 0) {
    state.x_hat_W_pred = s.mu;
  } else {
    require_length(u_prev, spec.B.cols(), "u_prev");
    state.x_hat_W_pred.noalias() = s.A * state.x_hat_W_filt;
    state.x_hat_W_pred.noalias() += spec.B * u_prev;
  }
  state.x_hat_W_filt = gamma ? x_true : state.x_hat_W_pred;
  ++state.k;
}

void advance_embedded(EmbeddedFilterState& state, bool gamma,
                      const Vector& x_true, const Vector& y_P,
                      const Vector& u_prev, const Vector& u_tilde_prev,
                      const AugmentedSpec& spec, const CovarianceStep& cov) {
  const SystemSpec& s = spec.spec();
  require_length(x_true, spec.n(), "x_true");
  require_length(y_P, spec.m(), "y_P");
  if (state.k < 0) {
    state.x_hat_P_pred = s.mu;
  } else {
    require_length(u_prev, spec.B.cols(), "u_prev");
    require_length(u_tilde_prev, spec.q(), "u_tilde_prev");
    state.x_hat_P_pred.noalias() = s.A * state.x_hat_P_filt;
    state.x_hat_P_pred.noalias() += spec.B * u_prev;
    state.x_hat_P_pred.noalias() += s.B_P * u_tilde_prev;
  }
  state.x_hat_PP = state.x_hat_P_pred;
  state.x_hat_PP.noalias() += cov.gain_G * (y_P - s.H * state.x_hat_P_pred);
  state.x_hat_P_filt = gamma ? x_true : state.x_hat_PP;
  state.Sigma_P_pred = cov.Sigma_P_pred;
  state.Sigma_PP = cov.Sigma_PP;
  state.Sigma_P_filt = cov.Sigma_P_filt;
  state.gain_G = cov.gain_G;
  ++state.k;
}

RemoteFilterState remote_update(const RemoteFilterState& prev, bool gamma,
                                const Vector& x_true, const Vector& u_prev,
                                const AugmentedSpec& spec) {
  RemoteFilterState next = prev;
  advance_remote(next, gamma, x_true, u_prev, spec);
  return next;
}

EmbeddedFilterState embedded_update(const EmbeddedFilterState& prev,
                                    bool gamma, const Vector& x_true,
                                    const Vector& y_P, const Vector& u_prev,
                                    const Vector& u_tilde_prev,
                                    const AugmentedSpec& spec,
                                    const CovarianceStep& cov) {
  EmbeddedFilterState next = prev;
  advance_embedded(next, gamma, x_true, y_P, u_prev, u_tilde_prev, spec, cov);
  return next;
}

EmbeddedFilterState embedded_update(const EmbeddedFilterState& prev,
                                    bool gamma, const Vector& x_true,
                                    const Vector& y_P, const Vector& u_prev,
                                    const Vector& u_tilde_prev,
                                    const AugmentedSpec& spec) {
  const Matrix Sigma_pred =
      prev.k < 0 ? spec.spec().sigma
                 : predicted_covariance(spec.base, prev.Sigma_P_filt);
  return embedded_update(prev, gamma, x_true, y_P, u_prev, u_tilde_prev, spec,
                         covariance_update(spec.base, Sigma_pred));
}

std::vector<Matrix> remote_error_covariance_schedule(
    const ValidatedSpec& spec, const std::vector<Matrix>& innovation_gains,
    std::size_t horizon) {
  if (innovation_gains.size() < horizon) {
    throw NcsError(ErrorKind::kScheduleMismatch,
                   "need one innovation gain per step");
  }
  const CovarianceSchedule cov = covariance_schedule(spec, horizon);
  std::vector<Matrix> out;
  out.reserve(horizon + 1);
  out.push_back(symmetrize(spec->p * spec->sigma));
  for (std::size_t k = 1; k <= horizon; ++k) {
    out.push_back(remote_covariance_step(spec, innovation_gains[k - 1],
                                         out.back(), cov[k - 1].Sigma_P_filt));
  }
  return out;
}

std::vector<Matrix> remote_error_covariance(const ValidatedSpec& spec,
                                            const Matrix& Omega,
                                            const Matrix& L,
                                            std::size_t horizon) {
  const Matrix K_tilde = omega_solve(Omega, L);
  return remote_error_covariance_schedule(
      spec, std::vector<Matrix>(horizon, K_tilde), horizon);
}

RemoteCovarianceLimit remote_error_covariance_limit(const ValidatedSpec& spec,
                                                    const Matrix& Omega,
                                                    const Matrix& L, double tol,
                                                    std::size_t max_iter) {
  const Matrix K_tilde = omega_solve(Omega, L);
  CovarianceStep cov = covariance_update(spec, spec->sigma);
  Matrix Sigma_W = symmetrize(spec->p * spec->sigma);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Matrix next_W =
        remote_covariance_step(spec, K_tilde, Sigma_W, cov.Sigma_P_filt);
    CovarianceStep next_cov =
        covariance_update(spec, predicted_covariance(spec, cov.Sigma_P_filt));
    const double change =
        std::max((next_W - Sigma_W).norm(),
                 (next_cov.Sigma_P_filt - cov.Sigma_P_filt).norm());
    if (!next_W.allFinite()) break;
    Sigma_W = std::move(next_W);
    cov = std::move(next_cov);
    const double scale = std::max(
        {1.0, Sigma_W.norm(), cov.Sigma_P_filt.norm()});
    if (change < tol * scale)
      return RemoteCovarianceLimit{std::move(Sigma_W), it};
  }
  throw NcsError(ErrorKind::kCovNotConverged,
                 "Sigma^W_{k|k} did not settle within " +
                     std::to_string(max_iter) + " iterations");
}

}  // namespace ncs
