#include "ncs/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

[[noreturn]] void config_error(const std::string& field,
                               const std::string& detail) {
  throw NcsError(ErrorKind::kConfigError, detail, field);
}

const Json& require(const Json& j, const std::string& field) {
  if (!j.is_object() || !j.contains(field)) {
    config_error(field, "missing field");
  }
  return j.at(field);
}

double number_from_json(const Json& j, const std::string& field) {
  if (!j.is_number()) config_error(field, "expected a number");
  return j.get<double>();
}

Vector vector_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array()) config_error(field, "expected a number or an array");
  // Accept [a, b, ...] as well as the column form [[a], [b], ...].
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& e = j[i];
    if (e.is_array() && e.size() == 1) {
      v(static_cast<Eigen::Index>(i)) = number_from_json(e[0], field);
    } else {
      v(static_cast<Eigen::Index>(i)) = number_from_json(e, field);
    }
  }
  return v;
}

Json stage_to_json(const StageGains& g) {
  return Json{{"K_W", matrix_to_json(g.K_W)},
              {"K_Phat", matrix_to_json(g.K_Phat)},
              {"K_Ptilde", matrix_to_json(g.K_Ptilde)}};
}

StageGains stage_from_json(const Json& j) {
  return StageGains{matrix_from_json(require(j, "K_W"), "K_W"),
                    matrix_from_json(require(j, "K_Phat"), "K_Phat"),
                    matrix_from_json(require(j, "K_Ptilde"), "K_Ptilde")};
}

Json certificates_to_json(const AreCertificates& c) {
  return Json{{"P_W_pd", c.P_W_pd},
              {"Delta_pd", c.Delta_pd},
              {"P_P_pd", c.P_P_pd},
              {"spectral_ok", c.spectral_ok},
              {"spectral_value", c.spectral_value}};
}

}  // namespace

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array()) config_error(field, "expected a number or nested array");
  const std::size_t rows = j.size();
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) {
    config_error(field, "matrices must be nested arrays (row-major)");
  }
  const std::size_t cols = j[0].size();
  Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      config_error(field, "ragged matrix: row " + std::to_string(r) +
                              " has a different length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number_from_json(j[r][c], field);
    }
  }
  return X;
}

Json matrix_to_json(const Matrix& X) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < X.cols(); ++c) row.push_back(X(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

SystemSpec spec_from_json(const Json& j) {
  if (!j.is_object()) config_error("spec", "expected a JSON object");
  SystemSpec s;
  s.A = matrix_from_json(require(j, "A"), "A");
  s.B_W = matrix_from_json(require(j, "B_W"), "B_W");
  s.B_P = matrix_from_json(require(j, "B_P"), "B_P");
  s.H = matrix_from_json(require(j, "H"), "H");
  s.Q = matrix_from_json(require(j, "Q"), "Q");
  s.R_W = matrix_from_json(require(j, "R_W"), "R_W");
  s.R_P = matrix_from_json(require(j, "R_P"), "R_P");
  s.Q_omega = matrix_from_json(require(j, "Q_omega"), "Q_omega");
  s.Q_v = matrix_from_json(require(j, "Q_v"), "Q_v");
  s.p = number_from_json(require(j, "p"), "p");
  s.mu = vector_from_json(require(j, "mu"), "mu");
  s.sigma = matrix_from_json(require(j, "sigma"), "sigma");
  s.P_terminal = matrix_from_json(require(j, "P_terminal"), "P_terminal");
  const Json& N = require(j, "N");
  if (!N.is_number_integer() || N.get<long long>() < 0) {
    config_error("N", "expected a non-negative integer");
  }
  s.N = N.get<std::size_t>();
  return s;
}

Json spec_to_json(const SystemSpec& s) {
  Json mu = Json::array();
  for (Eigen::Index i = 0; i < s.mu.size(); ++i) mu.push_back(s.mu(i));
  return Json{{"A", matrix_to_json(s.A)},
              {"B_W", matrix_to_json(s.B_W)},
              {"B_P", matrix_to_json(s.B_P)},
              {"H", matrix_to_json(s.H)},
              {"Q", matrix_to_json(s.Q)},
              {"R_W", matrix_to_json(s.R_W)},
              {"R_P", matrix_to_json(s.R_P)},
              {"Q_omega", matrix_to_json(s.Q_omega)},
              {"Q_v", matrix_to_json(s.Q_v)},
              {"p", s.p},
              {"mu", mu},
              {"sigma", matrix_to_json(s.sigma)},
              {"P_terminal", matrix_to_json(s.P_terminal)},
              {"N", s.N}};
}

Json riccati_to_json(const RiccatiSchedule& schedule) {
  Json steps = Json::array();
  for (const RiccatiStep& st : schedule.steps) {
    steps.push_back(Json{{"k", st.k},
                         {"P_W", matrix_to_json(st.P_W)},
                         {"P_P", matrix_to_json(st.P_P)},
                         {"Delta", matrix_to_json(st.Delta)},
                         {"Gamma", matrix_to_json(st.Gamma)},
                         {"M", matrix_to_json(st.M)},
                         {"Omega", matrix_to_json(st.Omega)},
                         {"L", matrix_to_json(st.L)}});
  }
  return Json{{"mode", "finite"},
              {"p", schedule.p},
              {"horizon", schedule.horizon()},
              {"P_terminal", matrix_to_json(schedule.P_terminal)},
              {"steps", std::move(steps)}};
}

Json riccati_to_json(const AreSolution& sol, const UniquenessReport& report) {
  return Json{{"mode", "stationary"},
              {"P_W", matrix_to_json(sol.P_W)},
              {"P_P", matrix_to_json(sol.P_P)},
              {"Delta", matrix_to_json(sol.Delta)},
              {"Gamma", matrix_to_json(sol.Gamma)},
              {"M", matrix_to_json(sol.M)},
              {"Omega", matrix_to_json(sol.Omega)},
              {"L", matrix_to_json(sol.L)},
              {"iterations", sol.iterations},
              {"residual_W", sol.residual_W},
              {"residual_P", sol.residual_P},
              {"certificates", certificates_to_json(sol.certificates)},
              {"uniqueness",
               Json{{"certified", report.certified},
                    {"bp_stabilizable", report.bp_stabilizable},
                    {"ad_observable", report.ad_observable},
                    {"details", report.details}}}};
}

Json gains_to_json(const GainSchedule& gains) {
  Json steps = Json::array();
  for (const StageGains& g : gains.steps) steps.push_back(stage_to_json(g));
  return Json{{"stationary", gains.stationary},
              {"horizon", gains.horizon},
              {"steps", std::move(steps)}};
}

GainSchedule gains_from_json(const Json& j) {
  GainSchedule g;
  const Json& stationary = require(j, "stationary");
  if (!stationary.is_boolean()) config_error("stationary", "expected bool");
  g.stationary = stationary.get<bool>();
  const Json& horizon = require(j, "horizon");
  if (!horizon.is_number_integer()) config_error("horizon", "expected int");
  g.horizon = horizon.get<std::size_t>();
  const Json& steps = require(j, "steps");
  if (!steps.is_array() || steps.empty()) {
    config_error("steps", "expected a non-empty array");
  }
  for (const Json& s : steps) g.steps.push_back(stage_from_json(s));
  if (g.stationary ? g.steps.size() != 1 : g.steps.size() != g.horizon + 1) {
    config_error("steps", "step count does not match the horizon");
  }
  return g;
}

GainSchedule gains_from_riccati_json(const Json& j) {
  const std::string mode = require(j, "mode").get<std::string>();
  if (mode == "stationary") {
    AreSolution sol;
    sol.Gamma = matrix_from_json(require(j, "Gamma"), "Gamma");
    sol.M = matrix_from_json(require(j, "M"), "M");
    sol.Omega = matrix_from_json(require(j, "Omega"), "Omega");
    sol.L = matrix_from_json(require(j, "L"), "L");
    const Json& c = require(j, "certificates");
    sol.certificates.P_W_pd = require(c, "P_W_pd").get<bool>();
    sol.certificates.Delta_pd = require(c, "Delta_pd").get<bool>();
    return synthesize_stationary(sol);
  }
  if (mode == "finite") {
    RiccatiSchedule schedule;
    for (const Json& s : require(j, "steps")) {
      RiccatiStep st;
      st.k = require(s, "k").get<int>();
      st.Gamma = matrix_from_json(require(s, "Gamma"), "Gamma");
      st.M = matrix_from_json(require(s, "M"), "M");
      st.Omega = matrix_from_json(require(s, "Omega"), "Omega");
      st.L = matrix_from_json(require(s, "L"), "L");
      schedule.steps.push_back(std::move(st));
    }
    if (schedule.steps.empty()) config_error("steps", "empty schedule");
    return synthesize_finite(schedule);
  }
  config_error("mode", "expected \"finite\" or \"stationary\"");
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error(path.string(), "cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    config_error(path.string(), e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) config_error(path.string(), "cannot write file");
  out << j.dump(2) << '\n';
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) config_error(path.string(), "cannot write file");
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_double(row[i]);
    }
    out << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const ReplicateTrace& trace) {
  std::vector<std::string> header{"k", "beta"};
  if (!trace.records.empty()) {
    const TrajectoryRecord& r0 = trace.records.front();
    auto add = [&header](const char* prefix, Eigen::Index count) {
      for (Eigen::Index i = 0; i < count; ++i) {
        header.push_back(prefix + std::to_string(i));
      }
    };
    add("x_", r0.x.size());
    add("xhatW_", r0.x_hat_W.size());
    add("xhatP_", r0.x_hat_P.size());
    add("uW_", r0.u_W.size());
    add("uP_", r0.u_P.size());
  }
  header.push_back("stage_cost");

  std::vector<std::vector<double>> rows;
  rows.reserve(trace.records.size());
  for (const TrajectoryRecord& r : trace.records) {
    std::vector<double> row{static_cast<double>(r.k),
                            static_cast<double>(r.beta)};
    for (const Vector* v : {&r.x, &r.x_hat_W, &r.x_hat_P, &r.u_W, &r.u_P}) {
      row.insert(row.end(), v->data(), v->data() + v->size());
    }
    row.push_back(r.stage_cost);
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<SummaryRow>& rows) {
  std::vector<std::vector<double>> data;
  for (const SummaryRow& r : rows) {
    data.push_back({r.p, static_cast<double>(r.replicates), r.mean_cost,
                    r.std_err, r.analytic_cost});
  }
  write_csv(path, {"p", "replicates", "mean_cost", "std_err", "analytic_cost"},
            data);
}

void write_msq_csv(const std::filesystem::path& path,
                   const std::vector<double>& empirical,
                   const std::vector<double>& analytic) {
  std::vector<std::vector<double>> data;
  const std::size_t len = std::max(empirical.size(), analytic.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < len; ++k) {
    data.push_back({static_cast<double>(k),
                    k < empirical.size() ? empirical[k] : nan,
                    k < analytic.size() ? analytic[k] : nan});
  }
  write_csv(path, {"k", "msq_empirical", "msq_analytic"}, data);
}

}  // namespace ncs
