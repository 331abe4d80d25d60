#include "ncs/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>
#include <tuple>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

constexpr std::size_t kBlockSize = 64;

// Everything a replicate needs that does not depend on the random draws.
struct SimContext {
  const AugmentedSpec& spec;
  const GainSchedule& gains;
  std::size_t horizon;
  CovarianceSchedule cov;
  Matrix F_sigma;
  Matrix F_omega;
  Matrix F_v;

  SimContext(const AugmentedSpec& s, const GainSchedule& g, std::size_t h)
      : spec(s),
        gains(g),
        horizon(h),
        cov(covariance_schedule(s.base, h)),
        F_sigma(psd_square_root_factor(s.spec().sigma)),
        F_omega(psd_square_root_factor(s.spec().Q_omega)),
        F_v(psd_square_root_factor(s.spec().Q_v)) {
    if (!g.covers(h)) {
      throw NcsError(ErrorKind::kScheduleMismatch,
                     "gain schedule horizon " + std::to_string(g.horizon) +
                         " is shorter than the simulation horizon " +
                         std::to_string(h));
    }
  }
};

struct ReplicateOutcome {
  double total_cost = 0.0;
  double terminal_cost = 0.0;
  bool diverged = false;
};

// Runs one replicate. `on_step(k, x)` sees x_k for k = 0..horizon+1,
// `on_stage(k, cost)` sees the stage cost for k = 0..horizon, and `record`
// (optional) receives the per-step trace.
template <typename OnStep, typename OnStage>
ReplicateOutcome simulate(const SimContext& ctx, const RandomStream& rng,
                          OnStep&& on_step, OnStage&& on_stage,
                          std::vector<TrajectoryRecord>* record,
                          Vector* x_terminal) {
  const SystemSpec& s = ctx.spec.spec();
  const Eigen::Index n = ctx.spec.n();
  const Eigen::Index w = ctx.spec.w();
  const Eigen::Index q = ctx.spec.q();
  const Eigen::Index m = ctx.spec.m();

  Vector z_n(n), z_m(m);
  rng.normals(0, DrawKind::kInitialState, z_n);
  Vector x = s.mu + ctx.F_sigma * z_n;
  Vector x_next(n), y(m);
  Vector u_W(w), u_hat(q), u_tilde(q), u_P(q);
  Vector u_prev = Vector::Zero(w + q);
  Vector u_tilde_prev = Vector::Zero(q);
  Vector gap(n);

  RemoteFilterState remote = remote_prior(ctx.spec);
  EmbeddedFilterState embedded = embedded_prior(ctx.spec);
  ReplicateOutcome out;

  for (std::size_t k = 0; k <= ctx.horizon; ++k) {
    on_step(k, x);
    const bool beta = rng.uniform(k, DrawKind::kChannel, 0) >= s.p;
    rng.normals(k, DrawKind::kObservationNoise, z_m);
    y.noalias() = s.H * x;
    y.noalias() += ctx.F_v * z_m;

    advance_remote(remote, beta, x, u_prev, ctx.spec);
    advance_embedded(embedded, beta, x, y, u_prev, u_tilde_prev, ctx.spec,
                     ctx.cov[k]);

    const StageGains& g = ctx.gains.at(k);
    gap = embedded.x_hat_P_filt - remote.x_hat_W_filt;
    u_W.noalias() = -g.K_W * remote.x_hat_W_filt;
    u_hat.noalias() = -g.K_Phat * remote.x_hat_W_filt;
    u_tilde.noalias() = -g.K_Ptilde * gap;
    u_P = u_hat + u_tilde;

    const double stage = x.dot(s.Q * x) + u_W.dot(s.R_W * u_W) +
                         u_P.dot(s.R_P * u_P);
    out.total_cost += stage;
    on_stage(k, stage);

    if (record != nullptr) {
      record->push_back(TrajectoryRecord{k, x, beta ? 1 : 0, y,
                                         remote.x_hat_W_filt,
                                         embedded.x_hat_P_filt, u_W, u_P,
                                         stage});
    }

    rng.normals(k, DrawKind::kProcessNoise, z_n);
    x_next.noalias() = s.A * x;
    x_next.noalias() += s.B_W * u_W;
    x_next.noalias() += s.B_P * u_P;
    x_next.noalias() += ctx.F_omega * z_n;
    x.swap(x_next);

    u_prev.head(w) = u_W;
    u_prev.tail(q) = u_hat;
    u_tilde_prev = u_tilde;

    if (!x.allFinite() || x.norm() > kDivergenceNorm) {
      out.diverged = true;
      break;
    }
  }

  if (!out.diverged) {
    on_step(ctx.horizon + 1, x);
    out.terminal_cost = x.dot(s.P_terminal * x);
    out.total_cost += out.terminal_cost;
  }
  if (x_terminal != nullptr) *x_terminal = x;
  if (out.diverged) {
    out.total_cost = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

std::size_t resolve_horizon(const AugmentedSpec& spec, std::size_t horizon) {
  return horizon == 0 ? spec.spec().N : horizon;
}

struct BlockSums {
  std::vector<double> msq;
  std::size_t diverged = 0;
};

}  // namespace

unsigned default_worker_count() {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NCS_ASYM_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && cap > 0) {
      workers = std::min<unsigned long>(workers, cap);
    }
  }
  return workers;
}

ReplicateTrace run_replicate(const AugmentedSpec& spec,
                             const GainSchedule& gains,
                             std::uint64_t master_seed, std::uint64_t replicate,
                             std::size_t horizon) {
  const SimContext ctx(spec, gains, resolve_horizon(spec, horizon));
  ReplicateTrace trace;
  trace.records.reserve(ctx.horizon + 1);
  const ReplicateOutcome outcome =
      simulate(ctx, RandomStream(master_seed, replicate),
               [](std::size_t, const Vector&) {},
               [](std::size_t, double) {}, &trace.records,
               &trace.x_terminal);
  trace.total_cost = outcome.total_cost;
  trace.terminal_cost = outcome.terminal_cost;
  trace.diverged = outcome.diverged;
  return trace;
}

SimResult monte_carlo(const AugmentedSpec& spec, const GainSchedule& gains,
                      std::size_t replicates, std::uint64_t master_seed,
                      const SimOptions& options) {
  if (replicates < 1) {
    throw NcsError(ErrorKind::kConfigError, "replicates must be at least 1",
                   "replicates");
  }
  const SimContext ctx(spec, gains, resolve_horizon(spec, options.horizon));
  const std::size_t steps = ctx.horizon + 2;
  const std::size_t tail = std::min(options.tail_window, steps);

  SimResult result;
  result.replicates = replicates;
  result.seed = master_seed;
  result.replicate_costs.assign(replicates, 0.0);
  std::vector<double> tail_means(replicates, 0.0);
  std::vector<double> tail_stage_means(replicates, 0.0);
  const std::size_t stage_tail = std::min(options.tail_window, steps - 1);

  const std::size_t n_blocks = (replicates + kBlockSize - 1) / kBlockSize;
  std::vector<BlockSums> blocks(n_blocks);

  auto run_block = [&](std::size_t b) {
    BlockSums& sums = blocks[b];
    sums.msq.assign(steps, 0.0);
    std::vector<double> local(steps, 0.0);
    std::vector<double> stages(steps - 1, 0.0);
    const std::size_t first = b * kBlockSize;
    const std::size_t last = std::min(replicates, first + kBlockSize);
    for (std::size_t r = first; r < last; ++r) {
      const ReplicateOutcome outcome = simulate(
          ctx, RandomStream(master_seed, r),
          [&local](std::size_t k, const Vector& x) {
            local[k] = x.squaredNorm();
          },
          [&stages](std::size_t k, double c) { stages[k] = c; }, nullptr,
          nullptr);
      result.replicate_costs[r] = outcome.total_cost;
      if (outcome.diverged) {
        ++sums.diverged;
        tail_means[r] = std::numeric_limits<double>::quiet_NaN();
        tail_stage_means[r] = tail_means[r];
        continue;
      }
      double tail_sum = 0.0;
      double stage_sum = 0.0;
      for (std::size_t k = 0; k < steps; ++k) sums.msq[k] += local[k];
      for (std::size_t k = steps - tail; k < steps; ++k) tail_sum += local[k];
      for (std::size_t k = stages.size() - stage_tail; k < stages.size(); ++k) {
        stage_sum += stages[k];
      }
      tail_means[r] = tail_sum / static_cast<double>(tail);
      tail_stage_means[r] = stage_sum / static_cast<double>(stage_tail);
    }
  };

  const unsigned workers = std::max<unsigned>(
      1, std::min<std::size_t>(options.threads ? options.threads
                                               : default_worker_count(),
                               n_blocks));
  if (workers == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t b = next++; b < n_blocks; b = next++) run_block(b);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Fixed-order reduction keeps the result independent of the worker count.
  result.msq_state.assign(steps, 0.0);
  for (const BlockSums& sums : blocks) {
    result.diverged += sums.diverged;
    for (std::size_t k = 0; k < steps; ++k) result.msq_state[k] += sums.msq[k];
  }
  const std::size_t kept = replicates - result.diverged;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (kept == 0) {
    result.mean_cost = result.cost_std_err = nan;
    result.tail_msq_mean = result.tail_msq_std_err = nan;
    result.tail_stage_cost_mean = result.tail_stage_cost_std_err = nan;
    std::fill(result.msq_state.begin(), result.msq_state.end(), nan);
    return result;
  }
  for (double& v : result.msq_state) v /= static_cast<double>(kept);

  auto mean_and_se = [kept, nan](const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) {
      if (!std::isnan(v)) sum += v;
    }
    const double mean = sum / static_cast<double>(kept);
    if (kept < 2) return std::pair{mean, nan};
    double ss = 0.0;
    for (double v : values) {
      if (!std::isnan(v)) ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(kept - 1));
    return std::pair{mean, sd / std::sqrt(static_cast<double>(kept))};
  };
  std::tie(result.mean_cost, result.cost_std_err) =
      mean_and_se(result.replicate_costs);
  std::tie(result.tail_msq_mean, result.tail_msq_std_err) =
      mean_and_se(tail_means);
  std::tie(result.tail_stage_cost_mean, result.tail_stage_cost_std_err) =
      mean_and_se(tail_stage_means);
  return result;
}

namespace {

// One step of X_{k+1} = F X F' + S for the second moment of the state, where
// the forcing collects the error-covariance terms at step k.
Matrix second_moment_step(const AugmentedSpec& spec, const Matrix& X,
                          const Matrix& K, const Matrix& K_tilde,
                          const Matrix& Sigma_W, const Matrix& Sigma_P) {
  const SystemSpec& s = spec.spec();
  const Matrix BK = spec.B * K;
  const Matrix F = s.A - BK;
  const Matrix BKt = s.B_P * K_tilde;
  const Matrix D = Sigma_W - Sigma_P;
  const Matrix FSW_BK = F * Sigma_W * BK.transpose();
  const Matrix FD_BKt = F * D * BKt.transpose();
  const Matrix BKD_BKt = BK * D * BKt.transpose();
  const Matrix forcing = FSW_BK + FSW_BK.transpose() - FD_BKt -
                         FD_BKt.transpose() + BK * Sigma_W * BK.transpose() -
                         BKD_BKt - BKD_BKt.transpose() +
                         BKt * D * BKt.transpose() + s.Q_omega;
  return symmetrize(F * X * F.transpose() + forcing);
}

Matrix stacked_gain(const StageGains& g) {
  Matrix K(g.K_W.rows() + g.K_Phat.rows(), g.K_W.cols());
  K << g.K_W, g.K_Phat;
  return K;
}

}  // namespace

std::vector<double> msq_trajectory(const AugmentedSpec& spec,
                                   const GainSchedule& gains,
                                   std::size_t horizon) {
  horizon = resolve_horizon(spec, horizon);
  if (!gains.covers(horizon)) {
    throw NcsError(ErrorKind::kScheduleMismatch,
                   "gain schedule shorter than the requested horizon");
  }
  const SystemSpec& s = spec.spec();
  std::vector<Matrix> innovation(horizon + 1);
  for (std::size_t k = 0; k <= horizon; ++k) {
    innovation[k] = gains.at(k).K_Ptilde;
  }
  const CovarianceSchedule cov = covariance_schedule(spec.base, horizon);
  const std::vector<Matrix> Sigma_W =
      remote_error_covariance_schedule(spec.base, innovation, horizon);

  std::vector<double> out;
  out.reserve(horizon + 2);
  Matrix X = s.mu * s.mu.transpose() + s.sigma;
  out.push_back(X.trace());
  for (std::size_t k = 0; k <= horizon; ++k) {
    const StageGains& g = gains.at(k);
    X = second_moment_step(spec, X, stacked_gain(g), g.K_Ptilde, Sigma_W[k],
                           cov[k].Sigma_P_filt);
    out.push_back(X.trace());
  }
  return out;
}

double msq_steady_state(const AugmentedSpec& spec, const AreSolution& sol,
                        const Matrix& Sigma_P_limit,
                        const Matrix& Sigma_W_limit) {
  if (!sol.certificates.spectral_ok) {
    throw NcsError(ErrorKind::kNotStable,
                   "spectral certificate fails: sqrt(p) rho = " +
                       std::to_string(sol.certificates.spectral_value));
  }
  const auto gamma = factor_positive_definite(sol.Gamma);
  const auto omega = factor_positive_definite(sol.Omega);
  if (!gamma || !omega) {
    throw NcsError(ErrorKind::kNotStable, "Gamma or Omega is singular");
  }
  const Matrix K = gamma->solve(sol.M);
  const Matrix K_tilde = omega->solve(sol.L);
  const Matrix F = spec.spec().A - spec.B * K;
  const double rho = spectral_radius(F);
  if (!(rho < 1.0)) {
    throw NcsError(ErrorKind::kNotStable,
                   "closed-loop mean dynamics have spectral radius " +
                       std::to_string(rho));
  }
  // The forcing term is the step map applied to X = 0.
  const Eigen::Index n = spec.n();
  const Matrix forcing = second_moment_step(
      spec, Matrix::Zero(n, n), K, K_tilde, Sigma_W_limit, Sigma_P_limit);
  return solve_discrete_lyapunov(F, forcing).trace();
}

}  // namespace ncs
