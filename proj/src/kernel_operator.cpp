#include "semiinfo/kernel_operator.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace semiinfo {

namespace {

constexpr double kSingularRcond = 1e-13;

void check_operator(const KernelOperator& op) {
  const auto m = static_cast<Eigen::Index>(op.size());
  if (op.multiplier.size() != m || op.kernel.rows() != m || op.kernel.cols() != m)
    throw DimensionError("KernelOperator: multiplier/kernel do not match the base grid");
}

Matrix inverse_checked(const Matrix& m, const char* name) {
  if (m.rows() == 0) return m;
  if (reciprocal_condition(m) < kSingularRcond)
    throw DomainError(std::string("singular block: ") + name);
  return m.fullPivLu().inverse();
}

}  // namespace

Direction apply(const KernelOperator& op, const Direction& a) {
  check_operator(op);
  if (a.size() != op.size()) throw DimensionError("apply: direction does not match grid");
  const Vector& w = op.base.masses();
  Vector wa = (a.values.array() * w.array()).matrix();
  Vector out = (op.multiplier.array() * a.values.array()).matrix() + op.kernel * wa;
  if (op.centering) out.array() -= op.multiplier.dot(wa);
  return {std::move(out), false};
}

Matrix as_matrix(const KernelOperator& op) {
  check_operator(op);
  const auto m = op.size();
  Matrix out(m, m);
  for (std::size_t j = 0; j < m; ++j)
    out.col(static_cast<Eigen::Index>(j)) = apply(op, Direction::unit(m, j)).values;
  return out;
}

double reciprocal_condition(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s[0] == 0.0) return 0.0;
  return s[s.size() - 1] / s[0];
}

SolveResult solve(const KernelOperator& op, const Direction& rhs, double ridge,
                  const SolverTolerances& tol) {
  return solve_matrix(as_matrix(op), op.base, op.centering, rhs.values, ridge, tol);
}

namespace {

struct WeightedSystem {
  Vector sqrt_w;
  Matrix weighted;  // D M_eff D^{-1}
  Vector rhs;       // D rhs (centered when required)
};

WeightedSystem weighted_system(const Matrix& m, const DiscreteMeasure& eta, bool centering,
                               const Vector& rhs) {
  const auto n = static_cast<Eigen::Index>(eta.size());
  if (m.rows() != n || m.cols() != n || rhs.size() != n)
    throw DimensionError("solve: operator/rhs do not match grid");
  if (!eta.strictly_positive())
    throw DomainError("solve: base measure must have strictly positive masses");
  const Vector& w = eta.masses();
  WeightedSystem sys;
  sys.sqrt_w = w.array().sqrt();
  Matrix eff = m;
  Vector r = rhs;
  if (centering) {
    eff += Vector::Ones(n) * w.transpose();
    r.array() -= r.dot(w) / w.sum();
  }
  sys.weighted = sys.sqrt_w.asDiagonal() * eff * sys.sqrt_w.cwiseInverse().asDiagonal();
  sys.rhs = (sys.sqrt_w.array() * r.array()).matrix();
  return sys;
}

Vector weighted_solve(const Eigen::BDCSVD<Matrix>& svd, const Vector& rhs, double ridge) {
  const auto& s = svd.singularValues();
  Vector coef = svd.matrixU().transpose() * rhs;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double denom = s[i] * s[i] + ridge;
    coef[i] = denom > 0.0 ? coef[i] * s[i] / denom : 0.0;
  }
  return svd.matrixV() * coef;
}

}  // namespace

SolveResult solve_matrix(const Matrix& m, const DiscreteMeasure& eta, bool centering,
                         const Vector& rhs, double ridge, const SolverTolerances& tol) {
  if (!(ridge >= 0.0)) throw DomainError("solve: ridge must be nonnegative");
  auto sys = weighted_system(m, eta, centering, rhs);
  Eigen::BDCSVD<Matrix> svd(sys.weighted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  const double smin = s.size() ? s[s.size() - 1] : 0.0;
  const double condition =
      smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

  SolveResult out;
  out.ridge = ridge;
  out.condition = condition;
  out.regularized = ridge > 0.0;
  if (ridge == 0.0 && !(smin >= tol.relative_sigma_min * smax && smax > 0.0))
    throw IllPosed("operator is numerically singular; a ridge is required", condition);

  Vector a = weighted_solve(svd, sys.rhs, ridge).cwiseQuotient(sys.sqrt_w);
  const Vector& w = eta.masses();
  if (centering) a.array() -= a.dot(w) / w.sum();
  Vector r = rhs;
  if (centering) r.array() -= r.dot(w) / w.sum();
  const Vector resid = m * a - r;
  out.residual_norm = std::sqrt((resid.array().square() * w.array()).sum());
  out.solution = {std::move(a), centering};
  return out;
}

std::vector<LadderPoint> ridge_ladder(const Matrix& m, const DiscreteMeasure& eta,
                                      bool centering, const Vector& rhs,
                                      const std::vector<double>& ridges) {
  auto sys = weighted_system(m, eta, centering, rhs);
  Eigen::BDCSVD<Matrix> svd(sys.weighted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& w = eta.masses();
  Vector r = rhs;
  if (centering) r.array() -= r.dot(w) / w.sum();
  const double rhs_norm = std::sqrt((r.array().square() * w.array()).sum());

  std::vector<LadderPoint> out;
  out.reserve(ridges.size());
  for (double ridge : ridges) {
    if (!(ridge > 0.0)) throw DomainError("ridge ladder entries must be positive");
    Vector a = weighted_solve(svd, sys.rhs, ridge).cwiseQuotient(sys.sqrt_w);
    if (centering) a.array() -= a.dot(w) / w.sum();
    const Vector resid = m * a - r;
    LadderPoint pt;
    pt.ridge = ridge;
    pt.residual_norm = std::sqrt((resid.array().square() * w.array()).sum());
    pt.relative_residual = rhs_norm > 0.0 ? pt.residual_norm / rhs_norm : 0.0;
    pt.solution_norm = std::sqrt((a.array().square() * w.array()).sum());
    out.push_back(pt);
  }
  return out;
}

std::vector<double> default_ridge_ladder() {
  std::vector<double> out;
  for (int k = 2; k <= 10; ++k) out.push_back(std::pow(10.0, -k));
  return out;
}

double min_eigen_sym(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("min_eigen_sym: matrix must be square");
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

Matrix restricted_form(const Matrix& m, const DiscreteMeasure& eta, bool centering) {
  const auto n = static_cast<Eigen::Index>(eta.size());
  if (m.rows() != n || m.cols() != n) throw DimensionError("restricted_form: shape mismatch");
  if (!eta.strictly_positive())
    throw DomainError("restricted_form: base measure must have strictly positive masses");
  const Vector sw = eta.masses().array().sqrt();
  Matrix weighted = sw.asDiagonal() * m * sw.cwiseInverse().asDiagonal();
  if (!centering) return weighted;
  // Orthonormal basis of the complement of sqrt(w): the eta-centered subspace.
  Eigen::HouseholderQR<Matrix> qr(sw);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Matrix basis = q.rightCols(n - 1);
  return basis.transpose() * weighted * basis;
}

BlockInformation BlockInformation::split(const Matrix& full, Eigen::Index p) {
  if (full.rows() != full.cols()) throw DimensionError("information matrix must be square");
  if (p < 0 || p > full.rows()) throw DimensionError("block size out of range");
  const auto q = full.rows() - p;
  return {full.topLeftCorner(p, p), full.topRightCorner(p, q), full.bottomRightCorner(q, q)};
}

Matrix BlockInformation::full() const {
  const auto p = i_tt.rows();
  const auto q = i_pp.rows();
  if (i_tt.cols() != p || i_pp.cols() != q || i_tp.rows() != p || i_tp.cols() != q)
    throw DimensionError("BlockInformation: inconsistent block shapes");
  Matrix out(p + q, p + q);
  out << i_tt, i_tp, i_tp.transpose(), i_pp;
  return out;
}

Matrix efficient_info_parametric(const BlockInformation& b) {
  b.full();  // shape check
  const Matrix pp_inv = inverse_checked(b.i_pp, "i_pp");
  return b.i_tt - b.i_tp * pp_inv * b.i_tp.transpose();
}

double block_inverse_identity_check(const BlockInformation& b) {
  b.full();
  const Matrix tt_inv = inverse_checked(b.i_tt, "i_tt");
  const Matrix tt_dot_p = efficient_info_parametric(b);
  const Matrix lhs = inverse_checked(tt_dot_p, "i_tt.p (efficient information for theta)");
  const Matrix pp_dot_t = b.i_pp - b.i_tp.transpose() * tt_inv * b.i_tp;
  const Matrix pp_dot_t_inv = inverse_checked(pp_dot_t, "i_pp.t");
  const Matrix rhs =
      tt_inv + tt_inv * b.i_tp * pp_dot_t_inv * b.i_tp.transpose() * tt_inv;
  if (lhs.size() == 0) return 0.0;
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace semiinfo
