#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ncs/io.hpp"
#include "ncs/model.hpp"
#include "ncs/riccati.hpp"

namespace ncs {

enum class SolveMode { kFinite, kStationary };

struct ExperimentConfig {
  SystemSpec spec;
  SolveMode mode = SolveMode::kFinite;
  /// Empty means "the spec's own p".
  std::vector<double> p_grid;
  std::size_t replicates = 1000;
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = ".";
  double are_tol = kDefaultAreTolerance;
  std::size_t max_iter = kDefaultAreMaxIter;
};

/// Accepts either {"spec": {...}, "mode": ..., ...} or a bare spec object.
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Directory holding the shipped AUUV configs.
std::filesystem::path shipped_config_dir();

/// Writes riccati.json and gains.json.
void cmd_solve(const ExperimentConfig& cfg, std::ostream& log);

/// Writes summary.csv, msq.csv and traj_<r>.csv for r < min(10, replicates).
/// With `gains_path` the stored gains (gains.json or riccati.json) replace
/// synthesis for every grid point.
void cmd_simulate(const ExperimentConfig& cfg,
                  const std::optional<std::filesystem::path>& gains_path,
                  std::ostream& log);

struct ReproduceOptions {
  std::filesystem::path output_dir = ".";
  std::uint64_t master_seed = 1;
  /// Zero keeps each shipped config's replicate count.
  std::size_t replicates = 0;
};

/// Writes fig3.csv .. fig6.csv from the shipped AUUV configs.
void cmd_reproduce_auuv(const ReproduceOptions& options, std::ostream& log);

/// Prints assumption checks and the stabilization verdict as JSON and writes
/// check.json. Returns the verdict.
Verdict cmd_check(const ExperimentConfig& cfg, std::ostream& log);

/// Gains for the config's mode. Throws on solver failure or, for stationary
/// mode, when the certificates needed for the gains are missing.
GainSchedule solve_gains(const AugmentedSpec& spec, const ExperimentConfig& cfg);

}  // namespace ncs
