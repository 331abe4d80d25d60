#include "ncs/experiment.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path base_dir() {
  return fs::temp_directory_path() / "ncs_experiment_test";
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = base_dir() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig shipped(const char* name) {
  return load_config(shipped_config_dir() / name);
}

GTEST_TEST(ExperimentTest, ShippedConfigsParse) {
  const ExperimentConfig finite = shipped("auuv_finite.json");
  EXPECT_EQ(finite.mode, SolveMode::kFinite);
  EXPECT_EQ(finite.spec.N, 100u);
  EXPECT_EQ(finite.p_grid.size(), 5u);
  EXPECT_EQ(shipped("auuv_noisy.json").spec.p, 0.6);
  EXPECT_EQ(shipped("auuv_noiseless.json").spec.Q_omega(0, 0), 0.0);
}

GTEST_TEST(ExperimentTest, BareSpecIsAcceptedAndGridIsValidated) {
  Json j = spec_to_json(shipped("auuv_finite.json").spec);
  const ExperimentConfig cfg = config_from_json(j);
  EXPECT_EQ(cfg.mode, SolveMode::kFinite);
  EXPECT_TRUE(cfg.p_grid.empty());

  Json full{{"spec", j}, {"p_grid", {0.1, 1.5}}};
  EXPECT_THROW(config_from_json(full), NcsError);
  full = Json{{"spec", j}, {"replicates", 0}};
  EXPECT_THROW(config_from_json(full), NcsError);
  full = Json{{"spec", j}, {"mode", "sideways"}};
  EXPECT_THROW(config_from_json(full), NcsError);
}

GTEST_TEST(ExperimentTest, SolveWritesCertifiedStationaryOutputs) {
  ExperimentConfig cfg = shipped("auuv_stationary.json");
  cfg.output_dir = fresh_dir("solve");
  std::ostringstream log;
  cmd_solve(cfg, log);
  const Json r = read_json_file(cfg.output_dir / "riccati.json");
  EXPECT_TRUE(r["certificates"]["P_W_pd"].get<bool>());
  EXPECT_TRUE(r["certificates"]["Delta_pd"].get<bool>());
  EXPECT_TRUE(r["certificates"]["P_P_pd"].get<bool>());
  EXPECT_TRUE(r["certificates"]["spectral_ok"].get<bool>());
  EXPECT_TRUE(fs::exists(cfg.output_dir / "gains.json"));
}

GTEST_TEST(ExperimentTest, DegenerateHorizonSolve) {
  ExperimentConfig cfg = shipped("auuv_finite.json");
  cfg.spec.N = 0;
  cfg.output_dir = fresh_dir("solve_n0");
  std::ostringstream log;
  cmd_solve(cfg, log);
  const Json r = read_json_file(cfg.output_dir / "riccati.json");
  ASSERT_EQ(r["steps"].size(), 1u);
  EXPECT_EQ(r["steps"][0]["P_W"][0][0].get<double>(), 0.01);
}

GTEST_TEST(ExperimentTest, UnstabilizableSolveIsAMathFailure) {
  ExperimentConfig cfg = shipped("auuv_stationary.json");
  cfg.spec.A(0, 0) = 2.0;
  cfg.spec.B_W.setZero();
  cfg.spec.B_P.setZero();
  cfg.output_dir = fresh_dir("unstab");
  std::ostringstream log;
  try {
    cmd_solve(cfg, log);
    FAIL();
  } catch (const NcsError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoConvergence);
    EXPECT_TRUE(is_mathematical_failure(e.kind()));
  }
}

GTEST_TEST(ExperimentTest, SimulateIsReproducibleAndReplaysStoredGains) {
  ExperimentConfig cfg = shipped("auuv_finite.json");
  cfg.replicates = 40;
  cfg.p_grid = {0.0, 0.5, 1.0};
  std::ostringstream log;

  cfg.output_dir = fresh_dir("sim_a");
  cmd_simulate(cfg, std::nullopt, log);
  cfg.output_dir = fresh_dir("sim_b");
  setenv("NCS_ASYM_THREADS", "3", 1);
  cmd_simulate(cfg, std::nullopt, log);
  unsetenv("NCS_ASYM_THREADS");

  for (const char* f : {"summary.csv", "msq.csv", "traj_0.csv", "traj_9.csv"}) {
    EXPECT_EQ(slurp(base_dir() / "sim_a" / f), slurp(base_dir() / "sim_b" / f))
        << f;
  }
  EXPECT_FALSE(fs::exists(cfg.output_dir / "traj_10.csv"));

  // Gains written by solve and replayed give the same trajectory files.
  ExperimentConfig own = cfg;
  own.p_grid.clear();
  own.output_dir = fresh_dir("sim_solve");
  cmd_solve(own, log);
  const fs::path gains = own.output_dir / "gains.json";
  const fs::path riccati = own.output_dir / "riccati.json";
  own.output_dir = fresh_dir("sim_replay_gains");
  cmd_simulate(own, gains, log);
  const fs::path via_gains = own.output_dir;
  own.output_dir = fresh_dir("sim_replay_riccati");
  cmd_simulate(own, riccati, log);
  const fs::path via_riccati = own.output_dir;
  own.output_dir = fresh_dir("sim_fresh");
  cmd_simulate(own, std::nullopt, log);
  for (const char* f : {"summary.csv", "msq.csv", "traj_3.csv"}) {
    EXPECT_EQ(slurp(via_gains / f), slurp(own.output_dir / f)) << f;
    EXPECT_EQ(slurp(via_riccati / f), slurp(own.output_dir / f)) << f;
  }
}

GTEST_TEST(ExperimentTest, CheckReportsVerdicts) {
  std::ostringstream log;
  ExperimentConfig noisy = shipped("auuv_noisy.json");
  noisy.output_dir = fresh_dir("check");
  EXPECT_EQ(cmd_check(noisy, log).kind, VerdictKind::kBounded);
  ExperimentConfig quiet = shipped("auuv_noiseless.json");
  quiet.output_dir = noisy.output_dir;
  EXPECT_EQ(cmd_check(quiet, log).kind, VerdictKind::kStabilizable);
  const Json j = read_json_file(quiet.output_dir / "check.json");
  EXPECT_EQ(j["verdict"], "STABILIZABLE");
  EXPECT_TRUE(j["assumptions"]["a4_bp_stabilizable_and_observable"].get<bool>());
}

}  // namespace
}  // namespace ncs
