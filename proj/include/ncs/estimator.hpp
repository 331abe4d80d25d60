#pragma once

#include <vector>

#include "ncs/linalg.hpp"
#include "ncs/model.hpp"

namespace ncs {

/// Control-independent covariance quantities of the embedded filter at one
/// time step k.
struct CovarianceStep {
  Matrix Sigma_P_pred;  // Sigma^P_{k|k-1}
  Matrix Sigma_PP;      // Sigma^{PP}_{k|k}
  Matrix Sigma_P_filt;  // Sigma^P_{k|k} = p * Sigma^{PP}_{k|k}
  Matrix gain_G;        // G^P_{k|k-1}
};

using CovarianceSchedule = std::vector<CovarianceStep>;

/// Measurement update from a given predicted covariance. Joseph form for
/// Sigma^{PP}; the innovation covariance is factored, never inverted.
CovarianceStep covariance_update(const ValidatedSpec& spec,
                                 const Matrix& Sigma_P_pred);

/// Entries k = 0..horizon, starting from Sigma^P_{0|-1} = sigma.
CovarianceSchedule covariance_schedule(const ValidatedSpec& spec,
                                       std::size_t horizon);

struct CovarianceLimit {
  CovarianceStep step;
  std::size_t iterations = 0;
  double last_change = 0.0;
};

/// Iterates the covariance recursion until successive Sigma^P_{k|k} differ by
/// less than `tol * max(1, |Sigma^P|)` in Frobenius norm, so large limits of
/// weakly observable systems are not held to an absolute threshold below
/// double resolution. Throws CovNotConverged.
CovarianceLimit covariance_limit(const ValidatedSpec& spec, double tol = 1e-12,
                                 std::size_t max_iter = 100000);

struct EmbeddedFilterState {
  Vector x_hat_P_pred;
  Vector x_hat_P_filt;
  Vector x_hat_PP;
  Matrix Sigma_P_pred;
  Matrix Sigma_P_filt;
  Matrix Sigma_PP;
  Matrix gain_G;
  /// -1 for the prior (before the first measurement).
  int k = -1;
};

struct RemoteFilterState {
  Vector x_hat_W_pred;
  Vector x_hat_W_filt;
  /// Left empty by remote_update; see remote_error_covariance.
  Matrix Sigma_W_filt;
  int k = -1;
};

RemoteFilterState remote_prior(const AugmentedSpec& spec);
EmbeddedFilterState embedded_prior(const AugmentedSpec& spec);

/// In-place forms of the two updates below, for the simulation loop.
void advance_remote(RemoteFilterState& state, bool gamma, const Vector& x_true,
                    const Vector& u_prev, const AugmentedSpec& spec);
void advance_embedded(EmbeddedFilterState& state, bool gamma,
                      const Vector& x_true, const Vector& y_P,
                      const Vector& u_prev, const Vector& u_tilde_prev,
                      const AugmentedSpec& spec, const CovarianceStep& cov);

/// Remote estimator: exact state when the packet arrives, model prediction
/// otherwise. The prediction uses only u_{k-1} = [u^W; \hat u^P]; the remote
/// side never sees y^P or the innovation input.
RemoteFilterState remote_update(const RemoteFilterState& prev, bool gamma,
                                const Vector& x_true, const Vector& u_prev,
                                const AugmentedSpec& spec);

/// Embedded estimator: Kalman update on y^P, reset to the true state when the
/// packet arrives. Covariances are propagated from `prev`.
EmbeddedFilterState embedded_update(const EmbeddedFilterState& prev,
                                    bool gamma, const Vector& x_true,
                                    const Vector& y_P, const Vector& u_prev,
                                    const Vector& u_tilde_prev,
                                    const AugmentedSpec& spec);

/// Same update with the covariance step taken from a precomputed schedule.
EmbeddedFilterState embedded_update(const EmbeddedFilterState& prev,
                                    bool gamma, const Vector& x_true,
                                    const Vector& y_P, const Vector& u_prev,
                                    const Vector& u_tilde_prev,
                                    const AugmentedSpec& spec,
                                    const CovarianceStep& cov);

/// Remote error covariance Sigma^W_{k|k}, k = 0..horizon, for a per-step
/// innovation gain K~_k (u~^P_k = -K~_k (x^P - x^W)). Starts at p*sigma.
/// `innovation_gains` must have at least `horizon` entries.
std::vector<Matrix> remote_error_covariance_schedule(
    const ValidatedSpec& spec, const std::vector<Matrix>& innovation_gains,
    std::size_t horizon);

/// Stationary version with K~ = Omega^{-1} L. Throws SingularOmega.
std::vector<Matrix> remote_error_covariance(const ValidatedSpec& spec,
                                            const Matrix& Omega,
                                            const Matrix& L,
                                            std::size_t horizon);

struct RemoteCovarianceLimit {
  Matrix Sigma_W;
  std::size_t iterations = 0;
};

/// Same scaled stopping rule as covariance_limit, applied jointly to Sigma^W
/// and Sigma^P. Throws SingularOmega or CovNotConverged.
RemoteCovarianceLimit remote_error_covariance_limit(
    const ValidatedSpec& spec, const Matrix& Omega, const Matrix& L,
    double tol = 1e-12, std::size_t max_iter = 100000);

}  // namespace ncs
