#pragma once

#include "semiinfo/expectation.hpp"
#include "semiinfo/kernel_operator.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace semiinfo {

enum class Category { Cat1, Cat2, Indeterminate };
const char* to_string(Category c);

struct InfoOptions {
  double bound_M = 1e4;             // Cat1 needs 1/M <= gamma <= M
  double tol_zero = 1e-10;          // |gamma| bound for Cat2 under exact engines
  double mc_sigma = 4.0;            // Cat2 bound is mc_sigma * max se under Monte Carlo
  std::vector<double> ridges = default_ridge_ladder();
  double regular_threshold = 1e-4;  // relative residual at the smallest ridge
  SolverTolerances solver;
};

/// E[score_theta score_theta'].
Matrix fisher_theta(const ExpectationEngine& e, const ModelComponents& mc, const ModelState& s);

/// B* applied to the theta-score, one column per coordinate: int beta dEta + alpha.
Matrix adjoint_score(const StructuralFunctions& sf, const ModelState& s, TangentKind tangent);

/// B*B as multiplier gamma plus kernel kappa (centered under L2Zero).
KernelOperator info_operator(const StructuralFunctions& sf, const ModelState& s,
                             TangentKind tangent);

/// Collocation matrix of V = B*B + K, with K a = -B*l I^{-1} <B*l, a>_eta.
/// Throws NotIdentifiable when the Fisher information is singular.
Matrix v_operator(const KernelOperator& info, const Matrix& adjoint, const Matrix& fisher);

Category classify_category(const Vector& gamma, double tol_zero, double bound_M);

/// Zero threshold for classification given the engine's standard errors.
double category_tolerance(const StructuralFunctions& sf, const ExpectationEngine& e,
                          const InfoOptions& opt);

struct LfdResult {
  Matrix lfd;                          // m x p
  std::vector<double> residual;        // eta-weighted, per column
  double ridge = 0.0;
  double condition = 0.0;
  bool regularized = false;
  std::vector<std::vector<LadderPoint>> ladder;  // per column, Cat2 only
};

/// Solves B*B a = B*l column-wise. Cat2 uses `ridge` (0 means unregularized,
/// which throws IllPosed when the kernel is singular) and records the ladder.
LfdResult least_favorable_direction(const KernelOperator& info, const Matrix& adjoint,
                                    Category category, double ridge, const InfoOptions& opt);

/// l - B a for each column a of `lfd`.
Vector efficient_score(const ModelComponents& mc, const ModelState& s, const Matrix& lfd,
                       const Observation& o);

struct EfficientInformation {
  Matrix route1;  // E[l~ l~']
  Matrix route2;  // I - <B*l, a~>_eta
  double min_eig = 0.0;
};

EfficientInformation efficient_information(const ExpectationEngine& e, const ModelComponents& mc,
                                           const ModelState& s, const Matrix& lfd,
                                           const Matrix& adjoint, const Matrix& fisher);

/// Smallest eigenvalue of the Gram matrix of the joint score family
/// {theta-scores} and {B b_i} for an eta-orthonormal basis b_i of the tangent space.
double check_local_identifiability(const ExpectationEngine& e, const ModelComponents& mc,
                                   const ModelState& s);

struct InfluenceResult {
  Direction lfd;
  std::function<double(const Observation&)> influence;
  double ridge = 0.0;
  double residual = 0.0;
  double relative_residual = 0.0;
  bool regular = true;
  std::vector<LadderPoint> ladder;
};

/// Solves B*B a = chi_dot for a model without theta and returns o -> B a(o).
/// A singular operator falls back to the ridge ladder; the solution is then
/// flagged non-regular if the residual at the smallest ridge stays large.
InfluenceResult nonparametric_efficient_influence(const ExpectationEngine& e,
                                                  const ModelComponents& mc,
                                                  const DiscreteMeasure& eta,
                                                  const Direction& chi_dot,
                                                  const InfoOptions& opt = {});

struct InfoReport {
  explicit InfoReport(KernelOperator op) : info_op(std::move(op)) {}

  Matrix fisher_theta;
  Matrix adjoint_score;
  KernelOperator info_op;
  Matrix v_op;
  Category category = Category::Indeterminate;
  Matrix lfd;
  Matrix eff_info;
  Matrix eff_info_cross;
  double min_eig_eff = 0.0;
  StructuralFunctions structural;

  struct Diagnostics {
    double info_condition = 0.0;
    double ridge = 0.0;
    bool regularized = false;
    std::vector<double> lfd_residual;
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double tol_zero = 0.0;
    double min_eig_v = 0.0;
    std::vector<std::vector<LadderPoint>> ladder;
  } diagnostics;
};

/// Full pipeline: structural functions, operators, category, least favorable
/// direction and both efficient-information routes.
InfoReport analyze(const ExpectationEngine& e, const ModelComponents& mc, const ModelState& s,
                   const InfoOptions& opt = {});

}  // namespace semiinfo
