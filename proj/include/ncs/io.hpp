#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncs/controller.hpp"
#include "ncs/model.hpp"
#include "ncs/riccati.hpp"
#include "ncs/sim.hpp"

namespace ncs {

using Json = nlohmann::json;

/// Matrices are row-major nested arrays; a bare number is a 1x1 matrix.
Matrix matrix_from_json(const Json& j, const std::string& field);
Json matrix_to_json(const Matrix& X);

/// Reads the SystemSpec fields. Throws NcsError(ConfigError) on missing or
/// malformed fields; dimension and definiteness checks are left to
/// validate_spec.
SystemSpec spec_from_json(const Json& j);
Json spec_to_json(const SystemSpec& spec);

Json riccati_to_json(const RiccatiSchedule& schedule);
Json riccati_to_json(const AreSolution& sol, const UniquenessReport& report);

Json gains_to_json(const GainSchedule& gains);
GainSchedule gains_from_json(const Json& j);

/// Rebuilds gains from a riccati.json written by either mode.
GainSchedule gains_from_riccati_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Fixed 17-significant-digit formatting used by every CSV writer.
std::string format_double(double v);

struct SummaryRow {
  double p = 0.0;
  std::size_t replicates = 0;
  double mean_cost = 0.0;
  double std_err = 0.0;
  double analytic_cost = 0.0;
};

void write_trajectory_csv(const std::filesystem::path& path,
                          const ReplicateTrace& trace);
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<SummaryRow>& rows);
void write_msq_csv(const std::filesystem::path& path,
                   const std::vector<double>& empirical,
                   const std::vector<double>& analytic);

/// Generic CSV writer: one header row, then numeric rows.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace ncs
