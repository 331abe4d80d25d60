#include "ncs/model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

std::string shape(const Matrix& X) {
  return std::to_string(X.rows()) + "x" + std::to_string(X.cols());
}

void require_shape(const Matrix& X, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (X.rows() != rows || X.cols() != cols) {
    throw NcsError(ErrorKind::kDimensionMismatch,
                   "expected " + std::to_string(rows) + "x" +
                       std::to_string(cols) + ", got " + shape(X),
                   name);
  }
}

void require_finite(const Matrix& X, const char* name) {
  if (!X.allFinite()) {
    throw NcsError(ErrorKind::kNonFinite, "entries must be finite", name);
  }
}

Matrix symmetric_field(const Matrix& X, const char* name) {
  if (relative_asymmetry(X) > kAsymmetryTolerance) {
    throw NcsError(ErrorKind::kNotSymmetric,
                   "relative asymmetry exceeds 1e-9", name);
  }
  return symmetrize(X);
}

Matrix psd_field(const Matrix& X, const char* name) {
  Matrix S = symmetric_field(X, name);
  if (!is_positive_semidefinite(S)) {
    throw NcsError(ErrorKind::kNotPSD, "has a negative eigenvalue", name);
  }
  return S;
}

Matrix pd_field(const Matrix& X, const char* name) {
  Matrix S = symmetric_field(X, name);
  if (!is_positive_definite(S)) {
    throw NcsError(ErrorKind::kNotPD, "Cholesky pivot below threshold", name);
  }
  return S;
}

std::string describe(const char* label, const PbhResult& r) {
  std::ostringstream os;
  os << label << ": " << (r.passed ? "pass" : "fail");
  for (const auto& c : r.checks) {
    os << " [lambda=" << c.eigenvalue.real();
    if (c.eigenvalue.imag() != 0.0) os << (c.eigenvalue.imag() > 0 ? "+" : "")
                                       << c.eigenvalue.imag() << "i";
    os << " sigma_min=" << c.min_singular_value << "]";
  }
  return os.str();
}

// C with C'C = X, rows restricted to the numerically nonzero spectrum.
Matrix output_factor(const Matrix& X) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(X));
  const Vector ev = es.eigenvalues();
  const double cutoff = kRankTolerance * std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff) keep.push_back(i);
  }
  Matrix C(static_cast<Eigen::Index>(keep.size()), X.rows());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    C.row(static_cast<Eigen::Index>(r)) =
        std::sqrt(ev(keep[r])) * es.eigenvectors().col(keep[r]).transpose();
  }
  return C;
}

}  // namespace

ValidatedSpec validate_spec(const SystemSpec& in) {
  const Eigen::Index n = in.A.rows();
  if (n == 0) {
    throw NcsError(ErrorKind::kDimensionMismatch, "state dimension is zero",
                   "A");
  }
  require_shape(in.A, n, n, "A");
  if (in.B_W.rows() != n || in.B_W.cols() == 0) {
    throw NcsError(ErrorKind::kDimensionMismatch,
                   "expected n rows and at least one column, got " +
                       shape(in.B_W),
                   "B_W");
  }
  if (in.B_P.rows() != n || in.B_P.cols() == 0) {
    throw NcsError(ErrorKind::kDimensionMismatch,
                   "expected n rows and at least one column, got " +
                       shape(in.B_P),
                   "B_P");
  }
  if (in.H.cols() != n || in.H.rows() == 0) {
    throw NcsError(ErrorKind::kDimensionMismatch,
                   "expected n columns and at least one row, got " +
                       shape(in.H),
                   "H");
  }
  const Eigen::Index w = in.B_W.cols();
  const Eigen::Index q = in.B_P.cols();
  const Eigen::Index m = in.H.rows();
  require_shape(in.Q, n, n, "Q");
  require_shape(in.R_W, w, w, "R_W");
  require_shape(in.R_P, q, q, "R_P");
  require_shape(in.Q_omega, n, n, "Q_omega");
  require_shape(in.Q_v, m, m, "Q_v");
  if (in.mu.size() != n) {
    throw NcsError(ErrorKind::kDimensionMismatch,
                   "expected length " + std::to_string(n) + ", got " +
                       std::to_string(in.mu.size()),
                   "mu");
  }
  require_shape(in.sigma, n, n, "sigma");
  require_shape(in.P_terminal, n, n, "P_terminal");

  require_finite(in.A, "A");
  require_finite(in.B_W, "B_W");
  require_finite(in.B_P, "B_P");
  require_finite(in.H, "H");
  require_finite(in.Q, "Q");
  require_finite(in.R_W, "R_W");
  require_finite(in.R_P, "R_P");
  require_finite(in.Q_omega, "Q_omega");
  require_finite(in.Q_v, "Q_v");
  require_finite(in.mu, "mu");
  require_finite(in.sigma, "sigma");
  require_finite(in.P_terminal, "P_terminal");

  if (!std::isfinite(in.p) || in.p < 0.0 || in.p > 1.0) {
    throw NcsError(ErrorKind::kBadProbability,
                   "dropout probability must lie in [0,1], got " +
                       std::to_string(in.p),
                   "p");
  }

  SystemSpec out = in;
  out.Q = psd_field(in.Q, "Q");
  out.Q_omega = psd_field(in.Q_omega, "Q_omega");
  out.sigma = psd_field(in.sigma, "sigma");
  out.P_terminal = psd_field(in.P_terminal, "P_terminal");
  out.Q_v = pd_field(in.Q_v, "Q_v");
  out.R_W = pd_field(in.R_W, "R_W");
  out.R_P = pd_field(in.R_P, "R_P");
  return ValidatedSpec(std::move(out));
}

AugmentedSpec augment(const ValidatedSpec& spec) {
  const SystemSpec& s = spec.spec();
  const Eigen::Index n = spec.n(), w = spec.w(), q = spec.q();
  Matrix B(n, w + q);
  B << s.B_W, s.B_P;
  Matrix R = Matrix::Zero(w + q, w + q);
  R.topLeftCorner(w, w) = s.R_W;
  R.bottomRightCorner(q, q) = s.R_P;
  return AugmentedSpec{std::move(B), std::move(R), spec};
}

AugmentedSpec prepare(const SystemSpec& spec) {
  return augment(validate_spec(spec));
}

Matrix assumption4_target(const ValidatedSpec& spec, const Matrix& P_W) {
  const double p = spec->p;
  return symmetrize(p * spec->Q + (1.0 - p) * P_W);
}

AssumptionReport check_assumptions(const ValidatedSpec& spec,
                                   const std::optional<Matrix>& P_W,
                                   bool require_a4) {
  const SystemSpec& s = spec.spec();
  AssumptionReport report;

  const bool rw_pd = is_positive_definite(s.R_W);
  const bool rp_pd = is_positive_definite(s.R_P);
  const bool q_psd = is_positive_semidefinite(s.Q);
  report.a1_weights_ok = rw_pd && rp_pd && q_psd;
  report.details.push_back(std::string("A1: R_W>0 ") + (rw_pd ? "yes" : "no") +
                           ", R_P>0 " + (rp_pd ? "yes" : "no") + ", Q>=0 " +
                           (q_psd ? "yes" : "no"));

  const PbhResult q_obs =
      pbh_observability(s.A, output_factor(s.Q), /*unstable_only=*/false);
  const PbhResult h_det = pbh_observability(s.A, s.H, /*unstable_only=*/true);
  report.a2_observable_detectable = q_obs.passed && h_det.passed;
  report.details.push_back(describe("A2 (A,Q^1/2) observable", q_obs));
  report.details.push_back(describe("A2 (A,H) detectable", h_det));

  Matrix B(s.A.rows(), s.B_W.cols() + s.B_P.cols());
  B << s.B_W, s.B_P;
  const PbhResult b_stab = pbh_controllability(s.A, B, /*unstable_only=*/true);
  report.a3_stabilizable_pair = b_stab.passed;
  report.details.push_back(describe("A3 (A,[B_W B_P]) stabilizable", b_stab));

  if (!P_W) {
    if (require_a4) {
      throw NcsError(ErrorKind::kNeedPW,
                     "assumption 4 needs a solved P^W from the coupled ARE");
    }
    report.details.push_back("A4: not evaluated (no P^W supplied)");
    return report;
  }
  if (P_W->rows() != s.A.rows() || P_W->cols() != s.A.rows()) {
    throw NcsError(ErrorKind::kDimensionMismatch, "P^W must be n x n", "P_W");
  }
  const Matrix target = assumption4_target(spec, *P_W);
  const double min_eig = symmetric_eigenvalues(target).minCoeff();
  const PbhResult bp_stab =
      pbh_controllability(s.A, s.B_P, /*unstable_only=*/true);
  report.details.push_back(describe("A4 (A,B_P) stabilizable", bp_stab));
  if (min_eig < -1e-10) {
    report.a4_bp_stabilizable_and_observable = false;
    report.details.push_back("A4: pQ+(1-p)P^W has eigenvalue " +
                             std::to_string(min_eig) + " < -1e-10");
    return report;
  }
  const PbhResult d_obs =
      pbh_observability(s.A, output_factor(target), /*unstable_only=*/false);
  report.details.push_back(describe("A4 (A,D) observable", d_obs));
  report.a4_bp_stabilizable_and_observable = bp_stab.passed && d_obs.passed;
  return report;
}

}  // namespace ncs
