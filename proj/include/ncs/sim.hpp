#pragma once

#include <cstdint>
#include <vector>

#include "ncs/controller.hpp"
#include "ncs/estimator.hpp"
#include "ncs/linalg.hpp"
#include "ncs/model.hpp"
#include "ncs/random_stream.hpp"
#include "ncs/riccati.hpp"

namespace ncs {

struct TrajectoryRecord {
  std::size_t k = 0;
  Vector x;
  int beta = 1;
  Vector y_P;
  Vector x_hat_W;
  Vector x_hat_P;
  Vector u_W;
  Vector u_P;
  double stage_cost = 0.0;
};

struct ReplicateTrace {
  std::vector<TrajectoryRecord> records;  // k = 0..horizon
  Vector x_terminal;                      // x_{horizon+1}
  double terminal_cost = 0.0;
  double total_cost = 0.0;
  bool diverged = false;
};

struct SimOptions {
  /// Steps k = 0..horizon are simulated. Zero means the spec's N.
  std::size_t horizon = 0;
  /// Worker count; zero means hardware concurrency capped by NCS_ASYM_THREADS.
  unsigned threads = 0;
  /// Number of trailing samples of x'x (and of the stage cost) averaged per
  /// replicate.
  std::size_t tail_window = 100;
};

struct SimResult {
  std::size_t replicates = 0;
  std::size_t diverged = 0;
  double mean_cost = 0.0;
  /// Sample standard deviation over sqrt(replicates). NaN with one replicate.
  double cost_std_err = 0.0;
  /// E[x_k'x_k] for k = 0..horizon+1 over non-diverged replicates.
  std::vector<double> msq_state;
  /// Per-replicate total cost, NaN for diverged replicates.
  std::vector<double> replicate_costs;
  std::uint64_t seed = 0;
  /// Per-replicate averages over the last tail_window steps, then the
  /// across-replicate mean and standard error.
  double tail_msq_mean = 0.0;
  double tail_msq_std_err = 0.0;
  double tail_stage_cost_mean = 0.0;
  double tail_stage_cost_std_err = 0.0;
};

/// Norm beyond which a replicate is flagged as diverged.
inline constexpr double kDivergenceNorm = 1e12;

ReplicateTrace run_replicate(const AugmentedSpec& spec,
                             const GainSchedule& gains,
                             std::uint64_t master_seed, std::uint64_t replicate,
                             std::size_t horizon = 0);

SimResult monte_carlo(const AugmentedSpec& spec, const GainSchedule& gains,
                      std::size_t replicates, std::uint64_t master_seed,
                      const SimOptions& options = {});

/// Worker count used when SimOptions::threads is zero.
unsigned default_worker_count();

/// Exact E[x_k'x_k] for k = 0..horizon+1 under the given gains, from the
/// second-moment recursion driven by the two estimation-error covariances.
std::vector<double> msq_trajectory(const AugmentedSpec& spec,
                                   const GainSchedule& gains,
                                   std::size_t horizon);

/// Limit of E[x_k'x_k] under the stationary gains. Throws NotStable unless
/// the spectral certificate holds and A - B Gamma^{-1} M is Schur.
double msq_steady_state(const AugmentedSpec& spec, const AreSolution& sol,
                        const Matrix& Sigma_P_limit,
                        const Matrix& Sigma_W_limit);

}  // namespace ncs
