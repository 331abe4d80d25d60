#include "ncs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "ncs/errors.hpp"

namespace ncs {

Matrix symmetrize(const Matrix& X) { return 0.5 * (X + X.transpose()); }

double relative_asymmetry(const Matrix& X) {
  const double scale = std::max(X.norm(), 1e-300);
  return (X - X.transpose()).norm() / scale;
}

bool all_finite(const Matrix& X) { return X.allFinite(); }

Vector symmetric_eigenvalues(const Matrix& X) {
  if (X.size() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(X),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

bool is_positive_semidefinite(const Matrix& X, double tol) {
  if (X.size() == 0) return true;
  const Vector ev = symmetric_eigenvalues(X);
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev.minCoeff() >= -tol * scale;
}

std::optional<Eigen::LLT<Matrix>> factor_positive_definite(
    const Matrix& X, double pivot_threshold) {
  if (!X.allFinite()) return std::nullopt;
  Eigen::LLT<Matrix> llt(symmetrize(X));
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Matrix L = llt.matrixL();
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    if (L(i, i) * L(i, i) <= pivot_threshold) return std::nullopt;
  }
  return llt;
}

bool is_positive_definite(const Matrix& X, double pivot_threshold) {
  return factor_positive_definite(X, pivot_threshold).has_value();
}

double spectral_radius(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix psd_square_root_factor(const Matrix& X, double clamp_floor) {
  const Eigen::Index n = X.rows();
  if (n == 0) return Matrix(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(X));
  Vector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ev(i) < clamp_floor) {
      throw NcsError(ErrorKind::kNotPSD,
                     "eigenvalue " + std::to_string(ev(i)) +
                         " below clamp floor");
    }
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal();
}

Matrix solve_discrete_lyapunov(const Matrix& F, const Matrix& S) {
  const Eigen::Index n = F.rows();
  // Column-major vec: vec(F X F') = (F kron F) vec(X).
  Matrix kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) = F(i, j) * F;
    }
  }
  const Matrix lhs = Matrix::Identity(n * n, n * n) - kron;
  const Vector rhs = Eigen::Map<const Vector>(S.data(), n * n);
  const Vector x = lhs.partialPivLu().solve(rhs);
  return symmetrize(Eigen::Map<const Matrix>(x.data(), n, n));
}

namespace {

PbhResult pbh_rank_test(const Matrix& A, const Matrix& B, bool unstable_only) {
  using Complex = std::complex<double>;
  using ComplexMatrix = Eigen::MatrixXcd;
  const Eigen::Index n = A.rows();
  PbhResult result;
  if (n == 0) return result;
  Eigen::EigenSolver<Matrix> es(A, false);
  const Eigen::VectorXcd eigs = es.eigenvalues();
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    const Complex lambda = eigs(i);
    if (unstable_only && std::abs(lambda) < 1.0) continue;
    ComplexMatrix pencil(n, n + B.cols());
    pencil.leftCols(n) = lambda * ComplexMatrix::Identity(n, n) -
                         A.cast<Complex>();
    pencil.rightCols(B.cols()) = B.cast<Complex>();
    Eigen::JacobiSVD<ComplexMatrix> svd(pencil);
    const Eigen::VectorXd sv = svd.singularValues();
    const double tol = kRankTolerance * std::max(1.0, sv(0));
    PbhEigenCheck check;
    check.eigenvalue = lambda;
    check.min_singular_value = sv(n - 1);
    check.full_rank = sv(n - 1) > tol;
    result.passed = result.passed && check.full_rank;
    result.checks.push_back(check);
  }
  return result;
}

}  // namespace

PbhResult pbh_controllability(const Matrix& A, const Matrix& B,
                              bool unstable_only) {
  return pbh_rank_test(A, B, unstable_only);
}

PbhResult pbh_observability(const Matrix& A, const Matrix& C,
                            bool unstable_only) {
  return pbh_rank_test(A.transpose(), C.transpose(), unstable_only);
}

}  // namespace ncs
