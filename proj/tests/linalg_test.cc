#include "ncs/linalg.hpp"

#include <random>

#include <gtest/gtest.h>

#include "ncs/errors.hpp"
#include "oracles.hpp"

namespace ncs {
namespace {

using Eigen::MatrixXd;

GTEST_TEST(LinalgTest, SymmetrizeAveragesTranspose) {
  MatrixXd X(2, 2);
  X << 1, 2, 4, 3;
  const MatrixXd S = symmetrize(X);
  EXPECT_DOUBLE_EQ(S(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(S(1, 0), 3.0);
  EXPECT_GT(relative_asymmetry(X), 0.1);
  EXPECT_EQ(relative_asymmetry(S), 0.0);
}

GTEST_TEST(LinalgTest, DefinitenessChecks) {
  MatrixXd psd(2, 2);
  psd << 1, 1, 1, 1;
  EXPECT_TRUE(is_positive_semidefinite(psd));
  EXPECT_FALSE(is_positive_definite(psd));
  EXPECT_TRUE(is_positive_definite(MatrixXd::Identity(3, 3)));
  EXPECT_FALSE(is_positive_semidefinite(-MatrixXd::Identity(2, 2)));
  EXPECT_FALSE(factor_positive_definite(MatrixXd::Zero(1, 1)).has_value());
}

GTEST_TEST(LinalgTest, SquareRootFactorReproducesMatrix) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd X = testing::random_spd(1 + trial % 4, rng);
    const MatrixXd F = psd_square_root_factor(X);
    EXPECT_LT((F * F.transpose() - X).norm(), 1e-12 * X.norm());
  }
  // Exactly zero covariance must be supported.
  const MatrixXd F0 = psd_square_root_factor(MatrixXd::Zero(2, 2));
  EXPECT_EQ(F0.norm(), 0.0);
  EXPECT_THROW(psd_square_root_factor(-MatrixXd::Identity(2, 2)), NcsError);
}

GTEST_TEST(LinalgTest, LyapunovMatchesFixedPointIteration) {
  MatrixXd F(2, 2), S(2, 2);
  F << 0.5, 0.2, -0.1, 0.7;
  S << 2, 0.3, 0.3, 1;
  const MatrixXd X = solve_discrete_lyapunov(F, S);
  MatrixXd it = MatrixXd::Zero(2, 2);
  for (int k = 0; k < 2000; ++k) it = F * it * F.transpose() + S;
  EXPECT_LT((X - it).norm(), 1e-10);
}

GTEST_TEST(LinalgTest, SpectralRadiusUsesComplexEigenvalues) {
  MatrixXd R(2, 2);
  R << 0, -2, 2, 0;  // eigenvalues +-2i
  EXPECT_NEAR(spectral_radius(R), 2.0, 1e-12);
}

GTEST_TEST(LinalgTest, PbhDetectsUncontrollableMode) {
  MatrixXd A(2, 2), B(2, 1);
  A << 2, 0, 0, 0.5;
  B << 0, 1;
  // The unstable mode at 2 is not reachable.
  EXPECT_FALSE(pbh_controllability(A, B, true).passed);
  B << 1, 0;
  // The uncontrollable mode at 0.5 is stable: stabilizable, not controllable.
  EXPECT_TRUE(pbh_controllability(A, B, true).passed);
  EXPECT_FALSE(pbh_controllability(A, B, false).passed);
}

GTEST_TEST(LinalgTest, PbhObservabilityOfJordanBlock) {
  MatrixXd A(2, 2), H(1, 2);
  A << 1, 1, 0, 1;
  H << 1, 0;
  EXPECT_TRUE(pbh_observability(A, H, false).passed);
  H << 0, 1;
  EXPECT_FALSE(pbh_observability(A, H, true).passed);
}

}  // namespace
}  // namespace ncs
