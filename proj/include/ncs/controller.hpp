#pragma once

#include <vector>

#include "ncs/estimator.hpp"
#include "ncs/linalg.hpp"
#include "ncs/model.hpp"
#include "ncs/riccati.hpp"

namespace ncs {

/// Feedback gains for one time step:
///   u^W      = -K_W      x^W_{k|k}
///   \hat u^P = -K_Phat   x^W_{k|k}
///   u~^P     = -K_Ptilde (x^P_{k|k} - x^W_{k|k})
struct StageGains {
  Matrix K_W;
  Matrix K_Phat;
  Matrix K_Ptilde;
};

struct GainSchedule {
  /// One entry per step k = 0..horizon, or a single entry when stationary.
  std::vector<StageGains> steps;
  std::size_t horizon = 0;
  bool stationary = false;

  /// Gains in force at step k. Stationary schedules repeat for every k.
  const StageGains& at(std::size_t k) const;
  /// Covers k = 0..N?
  bool covers(std::size_t N) const { return stationary || horizon >= N; }
};

GainSchedule synthesize_finite(const RiccatiSchedule& schedule);

/// Throws NotCertified unless P^W > 0 and Delta > 0.
GainSchedule synthesize_stationary(const AreSolution& sol);

struct CostTerms {
  double initial = 0.0;
  std::vector<double> per_step;
  double terminal = 0.0;
};

struct CostReport {
  double analytic = 0.0;
  CostTerms terms;
};

/// Finite-horizon optimal cost. `cov` must cover k = 0..N+1.
CostReport analytic_cost_finite(const ValidatedSpec& spec,
                                const RiccatiSchedule& schedule,
                                const CovarianceSchedule& cov);

/// Long-run average optimal cost for the noisy system, evaluated at the
/// limiting covariances: per_step holds the single stationary stage term.
CostReport analytic_cost_stationary(const ValidatedSpec& spec,
                                    const AreSolution& sol,
                                    const CovarianceLimit& limit);

/// Total infinite-horizon optimal cost for the noiseless system (Q_omega=0):
/// initial term plus the stage trace terms summed over the transient
/// covariance schedule until they fall below `tol`. Throws CovNotConverged.
CostReport analytic_cost_noiseless(const ValidatedSpec& spec,
                                   const AreSolution& sol, double tol = 1e-14,
                                   std::size_t max_iter = 100000);

/// The per-step trace term shared by all three cost forms, for the pair
/// (Sigma^P_{k|k}, G^P_{k+1|k}) with the k+1 Riccati matrices.
double stage_trace_term(const ValidatedSpec& spec, const Matrix& Sigma_P_filt,
                        const Matrix& gain_next, const Matrix& Delta_next,
                        const Matrix& P_P_next);

/// E{x_0'[P^W_0 x^W_{0|0} + P^P_0 (x^P_{0|0} - x^W_{0|0})]} in closed form.
double initial_cost_term(const ValidatedSpec& spec, const Matrix& P_W0,
                         const Matrix& P_P0, const CovarianceStep& cov0);

}  // namespace ncs
