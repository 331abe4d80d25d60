#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ncs/linalg.hpp"

namespace ncs {

/// Raw two-controller problem instance:
///   x_{k+1} = A x_k + B_W u^W_k + B_P u^P_k + w_k,
///   y^P_k = H x_k + v_k,  y^W_k = beta_k x_k,  P(beta_k = 0) = p,
/// with quadratic stage weights Q, R_W, R_P and terminal weight P_terminal.
struct SystemSpec {
  Matrix A;
  Matrix B_W;
  Matrix B_P;
  Matrix H;
  Matrix Q;
  Matrix R_W;
  Matrix R_P;
  Matrix Q_omega;
  Matrix Q_v;
  double p = 0.0;
  Vector mu;
  Matrix sigma;
  Matrix P_terminal;
  std::size_t N = 0;
};

/// A SystemSpec whose invariants have been checked. Only validate_spec can
/// construct one.
class ValidatedSpec {
 public:
  const SystemSpec& spec() const { return spec_; }
  const SystemSpec* operator->() const { return &spec_; }

  Eigen::Index n() const { return spec_.A.rows(); }
  Eigen::Index w() const { return spec_.B_W.cols(); }
  Eigen::Index q() const { return spec_.B_P.cols(); }
  Eigen::Index m() const { return spec_.H.rows(); }

 private:
  friend ValidatedSpec validate_spec(const SystemSpec& spec);
  explicit ValidatedSpec(SystemSpec spec) : spec_(std::move(spec)) {}
  SystemSpec spec_;
};

/// Working form after splitting u^P into its remote-measurable mean and
/// innovation: u = [u^W; \hat u^P], B = [B_W B_P], R = blockdiag(R_W, R_P).
struct AugmentedSpec {
  Matrix B;
  Matrix R;
  ValidatedSpec base;

  const SystemSpec& spec() const { return base.spec(); }
  Eigen::Index n() const { return base.n(); }
  Eigen::Index w() const { return base.w(); }
  Eigen::Index q() const { return base.q(); }
  Eigen::Index m() const { return base.m(); }
};

/// Symmetric inputs are replaced by (X+X')/2; relative asymmetry above this
/// is rejected.
inline constexpr double kAsymmetryTolerance = 1e-9;

/// Throws NcsError with kind DimensionMismatch, NotSymmetric, NotPSD, NotPD,
/// BadProbability or NonFinite.
ValidatedSpec validate_spec(const SystemSpec& spec);

AugmentedSpec augment(const ValidatedSpec& spec);

/// Convenience: validate then augment.
AugmentedSpec prepare(const SystemSpec& spec);

struct AssumptionReport {
  bool a1_weights_ok = false;
  bool a2_observable_detectable = false;
  bool a3_stabilizable_pair = false;
  /// Unset when no P^W was supplied.
  std::optional<bool> a4_bp_stabilizable_and_observable;
  std::vector<std::string> details;

  bool all_hold() const {
    return a1_weights_ok && a2_observable_detectable && a3_stabilizable_pair &&
           a4_bp_stabilizable_and_observable.value_or(false);
  }
};

/// Target of the D D' factorization used by the fourth assumption.
Matrix assumption4_target(const ValidatedSpec& spec, const Matrix& P_W);

/// Checks the four standing assumptions by PBH rank tests. The fourth needs a
/// solved P^W; when `require_a4` is set and `P_W` is absent, throws NeedPW.
AssumptionReport check_assumptions(const ValidatedSpec& spec,
                                   const std::optional<Matrix>& P_W = {},
                                   bool require_a4 = false);

}  // namespace ncs
