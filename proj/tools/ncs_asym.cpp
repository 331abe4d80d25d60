// Command-line front end: solve, simulate, reproduce-auuv, check.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ncs/errors.hpp"
#include "ncs/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 1;
constexpr int kExitMathFailure = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<double> tol;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config, "JSON config path");
  if (config_required) opt->required();
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--replicates", flags.replicates, "Monte Carlo replicates")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", flags.tol, "ARE convergence tolerance")
      ->check(CLI::PositiveNumber);
}

ncs::ExperimentConfig resolve(const CommonFlags& flags) {
  ncs::ExperimentConfig cfg = ncs::load_config(flags.config);
  if (flags.out) cfg.output_dir = *flags.out;
  if (flags.seed) cfg.master_seed = *flags.seed;
  if (flags.replicates) cfg.replicates = *flags.replicates;
  if (flags.tol) cfg.are_tol = *flags.tol;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal LQG control with asymmetric information over a lossy "
               "channel"};
  app.require_subcommand(1);

  CommonFlags solve_flags, sim_flags, check_flags, repro_flags;
  std::optional<std::string> gains_path;

  auto* solve = app.add_subcommand("solve", "write riccati.json and gains.json");
  add_common(solve, solve_flags, true);

  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo closed loop; writes summary/msq/trajectory CSVs");
  add_common(simulate, sim_flags, true);
  simulate->add_option("--gains", gains_path,
                       "stored gains.json or riccati.json to replay");

  auto* reproduce = app.add_subcommand(
      "reproduce-auuv", "run the four AUUV experiments (fig3..fig6 CSVs)");
  add_common(reproduce, repro_flags, false);

  auto* check = app.add_subcommand("check", "assumption checks and verdict");
  add_common(check, check_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadConfig;
  }

  try {
    if (*solve) {
      ncs::cmd_solve(resolve(solve_flags), std::cout);
    } else if (*simulate) {
      std::optional<std::filesystem::path> gains;
      if (gains_path) gains = *gains_path;
      ncs::cmd_simulate(resolve(sim_flags), gains, std::cout);
    } else if (*reproduce) {
      ncs::ReproduceOptions options;
      if (repro_flags.out) options.output_dir = *repro_flags.out;
      if (repro_flags.seed) options.master_seed = *repro_flags.seed;
      if (repro_flags.replicates) options.replicates = *repro_flags.replicates;
      ncs::cmd_reproduce_auuv(options, std::cout);
    } else if (*check) {
      const ncs::Verdict verdict = ncs::cmd_check(resolve(check_flags), std::cout);
      if (verdict.kind == ncs::VerdictKind::kNegative) {
        std::cerr << "NEGATIVE: " << verdict.failing_certificate << '\n';
        return kExitMathFailure;
      }
    }
  } catch (const ncs::NcsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ncs::is_mathematical_failure(e.kind()) ? kExitMathFailure
                                                  : kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  return kExitOk;
}
