#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace ncs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Smallest admissible pivot (squared Cholesky diagonal) when deciding
/// positive definiteness.
inline constexpr double kPivotThreshold = 1e-12;
/// Singular-value tolerance for PBH rank tests.
inline constexpr double kRankTolerance = 1e-10;

Matrix symmetrize(const Matrix& X);

/// ||X - X'||_F / max(||X||_F, 1e-300).
double relative_asymmetry(const Matrix& X);

bool all_finite(const Matrix& X);

/// Eigenvalues of the symmetric part of X, ascending.
Vector symmetric_eigenvalues(const Matrix& X);

/// Smallest eigenvalue >= -tol * max(1, largest |eigenvalue|).
bool is_positive_semidefinite(const Matrix& X, double tol = 1e-10);

/// Cholesky factorization of a symmetric matrix if every pivot exceeds
/// `pivot_threshold`, otherwise nullopt.
std::optional<Eigen::LLT<Matrix>> factor_positive_definite(
    const Matrix& X, double pivot_threshold = kPivotThreshold);

bool is_positive_definite(const Matrix& X,
                          double pivot_threshold = kPivotThreshold);

/// Largest absolute eigenvalue (complex eigenvalues allowed).
double spectral_radius(const Matrix& A);

/// Returns F with F F' = X for symmetric PSD X. Eigenvalues in
/// [clamp_floor, 0) are clamped to zero; anything lower throws NotPSD.
Matrix psd_square_root_factor(const Matrix& X, double clamp_floor = -1e-12);

/// Solves X = F X F' + S for X by vectorization. F must be Schur stable.
Matrix solve_discrete_lyapunov(const Matrix& F, const Matrix& S);

struct PbhEigenCheck {
  std::complex<double> eigenvalue;
  double min_singular_value = 0.0;
  bool full_rank = false;
};

struct PbhResult {
  bool passed = true;
  std::vector<PbhEigenCheck> checks;
};

/// PBH test on rank [lambda I - A, B] over the eigenvalues of A. With
/// `unstable_only`, eigenvalues strictly inside the unit circle are skipped
/// (stabilizability instead of controllability).
PbhResult pbh_controllability(const Matrix& A, const Matrix& B,
                              bool unstable_only);

/// Dual test on rank [lambda I - A; C] (observability or detectability).
PbhResult pbh_observability(const Matrix& A, const Matrix& C,
                            bool unstable_only);

}  // namespace ncs
