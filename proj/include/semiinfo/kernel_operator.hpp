#pragma once

#include "semiinfo/measure.hpp"

#include <vector>

namespace semiinfo {

/// Multiplier plus integral kernel over a base measure:
///   (K a)(u) = gamma(u) a(u) + sum_v kappa(u, v) a(v) w_v  [- sum_v gamma a w]
/// The bracketed term is present when `centering` is set (mean-zero tangent).
struct KernelOperator {
  DiscreteMeasure base;
  Vector multiplier;
  Matrix kernel;
  bool centering = false;

  std::size_t size() const { return base.size(); }
};

Direction apply(const KernelOperator& op, const Direction& a);

/// Collocation matrix M with M a == apply(op, a).
Matrix as_matrix(const KernelOperator& op);

struct SolverTolerances {
  double relative_sigma_min = 1e-8;  // sigma_min / sigma_max below this is ill-posed
};

struct SolveResult {
  Direction solution;
  double residual_norm = 0.0;  // eta-weighted
  double condition = 0.0;      // sigma_max / sigma_min of the weighted operator
  double ridge = 0.0;
  bool regularized = false;
};

SolveResult solve(const KernelOperator& op, const Direction& rhs, double ridge,
                  const SolverTolerances& tol = {});

/// Same contract for an arbitrary collocation matrix acting on directions over `eta`.
SolveResult solve_matrix(const Matrix& m, const DiscreteMeasure& eta, bool centering,
                         const Vector& rhs, double ridge,
                         const SolverTolerances& tol = {});

struct LadderPoint {
  double ridge = 0.0;
  double residual_norm = 0.0;
  double relative_residual = 0.0;
  double solution_norm = 0.0;
};

std::vector<LadderPoint> ridge_ladder(const Matrix& m, const DiscreteMeasure& eta,
                                      bool centering, const Vector& rhs,
                                      const std::vector<double>& ridges);

/// Default ladder 1e-2, 1e-3, ..., 1e-10.
std::vector<double> default_ridge_ladder();

/// Smallest eigenvalue of the symmetrized matrix.
double min_eigen_sym(const Matrix& m);

/// Symmetric matrix of the quadratic form <M a, b>_eta restricted to the
/// tangent space (all directions, or eta-centered ones), in an
/// eta-orthonormal basis. Its eigenvalues are those of the operator.
Matrix restricted_form(const Matrix& m, const DiscreteMeasure& eta, bool centering);

/// Partitioned parametric information [[i_tt, i_tp], [i_tp', i_pp]].
struct BlockInformation {
  Matrix i_tt;
  Matrix i_tp;
  Matrix i_pp;

  static BlockInformation split(const Matrix& full, Eigen::Index p);
  Matrix full() const;
};

/// I_tt - I_tp I_pp^{-1} I_pt.
Matrix efficient_info_parametric(const BlockInformation& b);

/// Max-norm gap between both sides of the partitioned-inverse identity
///   I_{tt.p}^{-1} = I_tt^{-1} + I_tt^{-1} I_tp I_{pp.t}^{-1} I_pt I_tt^{-1}.
double block_inverse_identity_check(const BlockInformation& b);

/// Reciprocal condition number (smallest / largest singular value).
double reciprocal_condition(const Matrix& m);

}  // namespace semiinfo
