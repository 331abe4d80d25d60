#include "ncs/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <string>

#include "ncs/controller.hpp"
#include "ncs/errors.hpp"
#include "ncs/estimator.hpp"
#include "ncs/sim.hpp"

namespace ncs {
namespace {

constexpr std::size_t kTraceFiles = 10;

struct Solved {
  GainSchedule gains;
  std::optional<RiccatiSchedule> schedule;
  std::optional<AreSolution> are;
};

bool is_noiseless(const SystemSpec& s) { return s.Q_omega.isZero(0.0); }

Solved solve(const AugmentedSpec& spec, const ExperimentConfig& cfg) {
  Solved out;
  if (cfg.mode == SolveMode::kFinite) {
    out.schedule = finite_horizon_recursion(spec);
    out.gains = synthesize_finite(*out.schedule);
    return out;
  }
  const AreAttempt attempt = attempt_are(spec, cfg.are_tol, cfg.max_iter);
  if (!attempt.solution) {
    throw NcsError(attempt.failure.value_or(ErrorKind::kNoConvergence),
                   attempt.message);
  }
  const Verdict gate = stabilization_verdict(attempt, false);
  if (gate.kind == VerdictKind::kNegative) {
    throw NcsError(ErrorKind::kNotCertified, gate.detail,
                   gate.failing_certificate);
  }
  out.are = *attempt.solution;
  out.gains = synthesize_stationary(*out.are);
  return out;
}

GainSchedule load_gains(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  return j.contains("mode") ? gains_from_riccati_json(j) : gains_from_json(j);
}

SystemSpec with_p(SystemSpec s, double p) {
  s.p = p;
  return s;
}

std::vector<double> grid_or_own(const ExperimentConfig& cfg) {
  return cfg.p_grid.empty() ? std::vector<double>{cfg.spec.p} : cfg.p_grid;
}

// Analytic optimal cost matched to what mean_cost measures for the mode:
// the total over the horizon (finite, or stationary without noise) or the
// long-run average stage cost (stationary with noise).
double analytic_cost(const AugmentedSpec& spec, const Solved& solved) {
  if (solved.schedule) {
    return analytic_cost_finite(spec.base, *solved.schedule,
                                covariance_schedule(spec.base, spec.spec().N + 1))
        .analytic;
  }
  if (is_noiseless(spec.spec())) {
    return analytic_cost_noiseless(spec.base, *solved.are).analytic;
  }
  return analytic_cost_stationary(spec.base, *solved.are,
                                  covariance_limit(spec.base))
      .analytic;
}

SummaryRow summary_row(double p, const SimResult& r, double analytic,
                       bool average_cost) {
  return SummaryRow{p, r.replicates,
                    average_cost ? r.tail_stage_cost_mean : r.mean_cost,
                    average_cost ? r.tail_stage_cost_std_err : r.cost_std_err,
                    analytic};
}

std::filesystem::path prepare_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

std::string p_label(double p) {
  std::string s = format_double(p);
  return "p" + s;
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) {
    throw NcsError(ErrorKind::kConfigError, "expected a JSON object", "config");
  }
  ExperimentConfig cfg;
  if (!j.contains("spec")) {
    cfg.spec = spec_from_json(j);
    return cfg;
  }
  cfg.spec = spec_from_json(j.at("spec"));
  try {
    if (j.contains("mode")) {
      const std::string mode = j.at("mode").get<std::string>();
      if (mode == "finite") {
        cfg.mode = SolveMode::kFinite;
      } else if (mode == "stationary") {
        cfg.mode = SolveMode::kStationary;
      } else {
        throw NcsError(ErrorKind::kConfigError,
                       "expected \"finite\" or \"stationary\"", "mode");
      }
    }
    if (j.contains("p_grid")) {
      cfg.p_grid = j.at("p_grid").get<std::vector<double>>();
    }
    if (j.contains("replicates")) {
      const long long r = j.at("replicates").get<long long>();
      if (r < 1) {
        throw NcsError(ErrorKind::kConfigError, "must be at least 1",
                       "replicates");
      }
      cfg.replicates = static_cast<std::size_t>(r);
    }
    if (j.contains("master_seed")) {
      cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    }
    if (j.contains("output_dir")) {
      cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    if (j.contains("are_tol")) cfg.are_tol = j.at("are_tol").get<double>();
    if (j.contains("max_iter")) {
      cfg.max_iter = j.at("max_iter").get<std::size_t>();
    }
  } catch (const Json::exception& e) {
    throw NcsError(ErrorKind::kConfigError, e.what(), "config");
  }
  for (double p : cfg.p_grid) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw NcsError(ErrorKind::kConfigError,
                     "entry " + format_double(p) + " is outside [0, 1]",
                     "p_grid");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

std::filesystem::path shipped_config_dir() {
  if (const char* env = std::getenv("NCS_ASYM_CONFIG_DIR")) return env;
  return NCS_CONFIG_DIR;
}

GainSchedule solve_gains(const AugmentedSpec& spec,
                         const ExperimentConfig& cfg) {
  return solve(spec, cfg).gains;
}

void cmd_solve(const ExperimentConfig& cfg, std::ostream& log) {
  const AugmentedSpec spec = prepare(cfg.spec);
  const Solved solved = solve(spec, cfg);
  const auto dir = prepare_dir(cfg.output_dir);
  if (solved.schedule) {
    write_json_file(dir / "riccati.json", riccati_to_json(*solved.schedule));
  } else {
    write_json_file(dir / "riccati.json",
                    riccati_to_json(*solved.are,
                                    uniqueness_check(spec.base, *solved.are)));
  }
  write_json_file(dir / "gains.json", gains_to_json(solved.gains));
  log << "wrote " << (dir / "riccati.json").string() << " and "
      << (dir / "gains.json").string() << '\n';
}

void cmd_simulate(const ExperimentConfig& cfg,
                  const std::optional<std::filesystem::path>& gains_path,
                  std::ostream& log) {
  const auto dir = prepare_dir(cfg.output_dir);
  const std::optional<GainSchedule> stored =
      gains_path ? std::optional<GainSchedule>(load_gains(*gains_path))
                 : std::nullopt;
  const bool average_cost =
      cfg.mode == SolveMode::kStationary && !is_noiseless(cfg.spec);

  std::vector<SummaryRow> rows;
  for (double p : grid_or_own(cfg)) {
    const AugmentedSpec spec = prepare(with_p(cfg.spec, p));
    const Solved solved = solve(spec, cfg);
    const GainSchedule& gains = stored ? *stored : solved.gains;
    const SimResult r = monte_carlo(spec, gains, cfg.replicates,
                                    cfg.master_seed);
    rows.push_back(
        summary_row(p, r, analytic_cost(spec, solved), average_cost));
    log << "p=" << format_double(p) << " mean_cost=" << rows.back().mean_cost
        << " std_err=" << rows.back().std_err
        << " analytic=" << rows.back().analytic_cost;
    if (r.diverged > 0) log << " diverged=" << r.diverged;
    log << '\n';
  }
  write_summary_csv(dir / "summary.csv", rows);

  // Trajectory-level outputs use the spec's own p.
  const AugmentedSpec spec = prepare(cfg.spec);
  const GainSchedule gains = stored ? *stored : solve(spec, cfg).gains;
  const SimResult own =
      monte_carlo(spec, gains, cfg.replicates, cfg.master_seed);
  write_msq_csv(dir / "msq.csv", own.msq_state,
                msq_trajectory(spec, gains, spec.spec().N));
  const std::size_t traces = std::min(kTraceFiles, cfg.replicates);
  for (std::size_t r = 0; r < traces; ++r) {
    write_trajectory_csv(dir / ("traj_" + std::to_string(r) + ".csv"),
                         run_replicate(spec, gains, cfg.master_seed, r));
  }
}

void cmd_reproduce_auuv(const ReproduceOptions& options, std::ostream& log) {
  const auto dir = prepare_dir(options.output_dir);
  const auto configs = shipped_config_dir();
  auto load = [&](const char* name) {
    ExperimentConfig cfg = load_config(configs / name);
    if (options.replicates > 0) cfg.replicates = options.replicates;
    cfg.master_seed = options.master_seed;
    return cfg;
  };

  // Fig 3: one replicate's velocity u^W + u^P for three dropout rates, with
  // common noise.
  {
    const ExperimentConfig cfg = load("auuv_finite.json");
    const std::vector<double> ps{0.0, 0.5, 1.0};
    std::vector<ReplicateTrace> traces;
    for (double p : ps) {
      const AugmentedSpec spec = prepare(with_p(cfg.spec, p));
      traces.push_back(
          run_replicate(spec, solve(spec, cfg).gains, cfg.master_seed, 0));
    }
    std::vector<std::string> header{"k"};
    for (double p : ps) header.push_back("velocity_" + p_label(p));
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < traces.front().records.size(); ++k) {
      std::vector<double> row{static_cast<double>(k)};
      for (const auto& t : traces) {
        row.push_back(t.records[k].u_W.sum() + t.records[k].u_P.sum());
      }
      rows.push_back(std::move(row));
    }
    write_csv(dir / "fig3.csv", header, rows);
    log << "fig3.csv: " << rows.size() << " steps\n";
  }

  // Fig 4: optimal cost against p.
  {
    const ExperimentConfig cfg = load("auuv_finite.json");
    std::vector<std::vector<double>> rows;
    for (int i = 0; i <= 10; ++i) {
      const double p = 0.1 * i;
      const AugmentedSpec spec = prepare(with_p(cfg.spec, p));
      const Solved solved = solve(spec, cfg);
      const SimResult r =
          monte_carlo(spec, solved.gains, cfg.replicates, cfg.master_seed);
      rows.push_back({p, analytic_cost(spec, solved), r.mean_cost,
                      r.cost_std_err});
    }
    write_csv(dir / "fig4.csv", {"p", "analytic_cost", "mean_cost", "std_err"},
              rows);
    log << "fig4.csv: " << rows.size() << " dropout rates\n";
  }

  // Figs 5 and 6: E[x_k'x_k] under the stationary gains.
  auto msq_figure = [&](const char* config, const char* file,
                        bool with_steady_state) {
    const ExperimentConfig cfg = load(config);
    const AugmentedSpec spec = prepare(cfg.spec);
    const Solved solved = solve(spec, cfg);
    const SimResult r =
        monte_carlo(spec, solved.gains, cfg.replicates, cfg.master_seed);
    const std::vector<double> analytic =
        msq_trajectory(spec, solved.gains, spec.spec().N);
    std::vector<std::string> header{"k", "msq_empirical", "msq_analytic"};
    double steady = 0.0;
    if (with_steady_state) {
      header.push_back("msq_steady_state");
      steady = msq_steady_state(
          spec, *solved.are, covariance_limit(spec.base).step.Sigma_P_filt,
          remote_error_covariance_limit(spec.base, solved.are->Omega,
                                        solved.are->L)
              .Sigma_W);
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < r.msq_state.size(); ++k) {
      rows.push_back({static_cast<double>(k), r.msq_state[k], analytic[k]});
      if (with_steady_state) rows.back().push_back(steady);
    }
    write_csv(dir / file, header, rows);
    log << file << ": " << rows.size() << " steps\n";
  };
  msq_figure("auuv_noiseless.json", "fig5.csv", false);
  msq_figure("auuv_noisy.json", "fig6.csv", true);
}

Verdict cmd_check(const ExperimentConfig& cfg, std::ostream& log) {
  const AugmentedSpec spec = prepare(cfg.spec);
  const AreAttempt attempt = attempt_are(spec, cfg.are_tol, cfg.max_iter);
  const std::optional<Matrix> P_W =
      attempt.solution ? std::optional<Matrix>(attempt.solution->P_W)
                       : std::nullopt;
  const AssumptionReport assumptions = check_assumptions(spec.base, P_W);
  const Verdict verdict =
      stabilization_verdict(attempt, !is_noiseless(spec.spec()));

  Json report{
      {"assumptions",
       Json{{"a1_weights_ok", assumptions.a1_weights_ok},
            {"a2_observable_detectable", assumptions.a2_observable_detectable},
            {"a3_stabilizable_pair", assumptions.a3_stabilizable_pair},
            {"a4_bp_stabilizable_and_observable",
             assumptions.a4_bp_stabilizable_and_observable
                 ? Json(*assumptions.a4_bp_stabilizable_and_observable)
                 : Json(nullptr)},
            {"details", assumptions.details}}},
      {"verdict", std::string(to_string(verdict.kind))},
      {"failing_certificate", verdict.failing_certificate},
      {"detail", verdict.detail}};
  if (attempt.solution) {
    const AreCertificates& c = attempt.solution->certificates;
    report["certificates"] = Json{{"P_W_pd", c.P_W_pd},
                                  {"Delta_pd", c.Delta_pd},
                                  {"P_P_pd", c.P_P_pd},
                                  {"spectral_ok", c.spectral_ok},
                                  {"spectral_value", c.spectral_value}};
    report["iterations"] = attempt.solution->iterations;
  }
  const auto dir = prepare_dir(cfg.output_dir);
  write_json_file(dir / "check.json", report);
  log << report.dump(2) << '\n';
  return verdict;
}

}  // namespace ncs
