#include "semiinfo/info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semiinfo {

const char* to_string(Category c) {
  switch (c) {
    case Category::Cat1: return "Cat1";
    case Category::Cat2: return "Cat2";
    default: return "Indeterminate";
  }
}

namespace {

bool centering(TangentKind t) { return t == TangentKind::L2Zero; }

Matrix outer_mean(const ExpectationEngine& e, const ModelState& s,
                  const std::function<Vector(const Observation&)>& fn, Eigen::Index k) {
  Functional outer = [&](const Observation& o) -> Vector {
    const Vector v = fn(o);
    return (v * v.transpose()).reshaped();
  };
  Matrix out = expect(e, s, outer).value.reshaped(k, k);
  return 0.5 * (out + out.transpose());
}

// eta-orthonormal basis of the tangent space, one direction per column.
Matrix tangent_basis(const DiscreteMeasure& eta, bool centered) {
  const auto n = static_cast<Eigen::Index>(eta.size());
  const Vector sw = eta.masses().array().sqrt();
  Matrix q = Matrix::Identity(n, n);
  if (centered) {
    Eigen::HouseholderQR<Matrix> qr(sw);
    Matrix full = qr.householderQ() * Matrix::Identity(n, n);
    q = full.rightCols(n - 1);
  }
  return sw.cwiseInverse().asDiagonal() * q;
}

}  // namespace

Matrix fisher_theta(const ExpectationEngine& e, const ModelComponents& mc, const ModelState& s) {
  check_state(mc, s);
  if (mc.p == 0) return Matrix(0, 0);
  return outer_mean(e, s, [&](const Observation& o) { return score_theta(mc, s, o); }, mc.p);
}

Matrix adjoint_score(const StructuralFunctions& sf, const ModelState& s, TangentKind tangent) {
  const Vector& w = s.eta.masses();
  const auto m = static_cast<Eigen::Index>(s.eta.size());
  const auto p = sf.alpha.cols();
  if (sf.alpha.rows() != m || static_cast<Eigen::Index>(sf.beta.size()) != p)
    throw DimensionError("structural functions do not match the grid");
  Matrix out(m, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    out.col(j) = sf.beta[static_cast<std::size_t>(j)] * w + sf.alpha.col(j);
    if (centering(tangent)) out.col(j).array() -= out.col(j).dot(w) / w.sum();
  }
  return out;
}

KernelOperator info_operator(const StructuralFunctions& sf, const ModelState& s,
                             TangentKind tangent) {
  KernelOperator op{s.eta, sf.gamma, sf.kappa, centering(tangent)};
  if (sf.gamma.size() != static_cast<Eigen::Index>(s.eta.size()))
    throw DimensionError("structural functions do not match the grid");
  return op;
}

Matrix v_operator(const KernelOperator& info, const Matrix& adjoint, const Matrix& fisher) {
  Matrix m = as_matrix(info);
  if (fisher.size() == 0) return m;
  if (fisher.rows() != adjoint.cols()) throw DimensionError("fisher/adjoint shapes differ");
  const double scale = std::max(1.0, fisher.cwiseAbs().maxCoeff());
  if (min_eigen_sym(fisher) <= 1e-12 * scale || reciprocal_condition(fisher) < 1e-12)
    throw NotIdentifiable("Fisher information for theta is singular");
  const Vector& w = info.base.masses();
  const Matrix inv = fisher.ldlt().solve(Matrix::Identity(fisher.rows(), fisher.cols()));
  return m - adjoint * inv * adjoint.transpose() * w.asDiagonal();
}

Category classify_category(const Vector& gamma, double tol_zero, double bound_M) {
  if (gamma.size() == 0) return Category::Indeterminate;
  if (gamma.minCoeff() >= 1.0 / bound_M && gamma.maxCoeff() <= bound_M) return Category::Cat1;
  if (gamma.cwiseAbs().maxCoeff() <= tol_zero) return Category::Cat2;
  return Category::Indeterminate;
}

double category_tolerance(const StructuralFunctions& sf, const ExpectationEngine& e,
                          const InfoOptions& opt) {
  if (is_exact(e)) return opt.tol_zero;
  return std::max(opt.tol_zero, opt.mc_sigma * sf.max_se());
}

LfdResult least_favorable_direction(const KernelOperator& info, const Matrix& adjoint,
                                    Category category, double ridge, const InfoOptions& opt) {
  const Matrix m = as_matrix(info);
  const auto p = adjoint.cols();
  LfdResult out;
  out.lfd.resize(m.rows(), p);
  out.ridge = category == Category::Cat2 ? ridge : 0.0;
  out.regularized = out.ridge > 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const SolveResult r =
        solve_matrix(m, info.base, info.centering, adjoint.col(j), out.ridge, opt.solver);
    out.lfd.col(j) = r.solution.values;
    out.residual.push_back(r.residual_norm);
    out.condition = r.condition;
    if (category == Category::Cat2 && !opt.ridges.empty())
      out.ladder.push_back(ridge_ladder(m, info.base, info.centering, adjoint.col(j), opt.ridges));
  }
  return out;
}

Vector efficient_score(const ModelComponents& mc, const ModelState& s, const Matrix& lfd,
                       const Observation& o) {
  const ObservationTerms t = evaluate_terms(mc, s, o);
  Vector out = score_theta(t);
  if (lfd.cols() != out.size()) throw DimensionError("lfd must have one column per theta");
  for (Eigen::Index j = 0; j < lfd.cols(); ++j) out[j] -= score_operator(mc, s, o, t, lfd.col(j));
  return out;
}

EfficientInformation efficient_information(const ExpectationEngine& e, const ModelComponents& mc,
                                           const ModelState& s, const Matrix& lfd,
                                           const Matrix& adjoint, const Matrix& fisher) {
  EfficientInformation out;
  const Vector& w = s.eta.masses();
  out.route2 = fisher - adjoint.transpose() * w.asDiagonal() * lfd;
  out.route2 = 0.5 * (out.route2 + out.route2.transpose());
  out.route1 = outer_mean(e, s, [&](const Observation& o) { return efficient_score(mc, s, lfd, o); },
                          mc.p);
  out.min_eig = min_eigen_sym(out.route1);
  return out;
}

double check_local_identifiability(const ExpectationEngine& e, const ModelComponents& mc,
                                   const ModelState& s) {
  check_state(mc, s);
  const Matrix basis = tangent_basis(s.eta, centering(mc.tangent));
  const auto k = mc.p + basis.cols();
  auto family = [&](const Observation& o) -> Vector {
    const ObservationTerms t = evaluate_terms(mc, s, o);
    Vector v(k);
    v.head(mc.p) = score_theta(t);
    for (Eigen::Index i = 0; i < basis.cols(); ++i)
      v[mc.p + i] = score_operator(mc, s, o, t, basis.col(i));
    return v;
  };
  return min_eigen_sym(outer_mean(e, s, family, k));
}

InfluenceResult nonparametric_efficient_influence(const ExpectationEngine& e,
                                                  const ModelComponents& mc,
                                                  const DiscreteMeasure& eta,
                                                  const Direction& chi_dot,
                                                  const InfoOptions& opt) {
  if (mc.p != 0) throw DomainError("efficient influence requires a model without theta");
  ModelState s{Vector(0), eta};
  check_state(mc, s);
  if (chi_dot.size() != eta.size()) throw DimensionError("chi_dot does not match grid");
  const StructuralFunctions sf = structural_functions(e, mc, s);
  const KernelOperator op = info_operator(sf, s, mc.tangent);
  const Matrix m = as_matrix(op);
  Vector rhs = chi_dot.values;
  if (op.centering) rhs.array() -= rhs.dot(eta.masses()) / eta.total_mass();
  const double rhs_norm = std::sqrt((rhs.array().square() * eta.masses().array()).sum());

  InfluenceResult out;
  SolveResult r;
  try {
    r = solve_matrix(m, eta, op.centering, rhs, 0.0, opt.solver);
  } catch (const IllPosed&) {
    if (opt.ridges.empty()) throw;
    out.ladder = ridge_ladder(m, eta, op.centering, rhs, opt.ridges);
    const double smallest = *std::min_element(opt.ridges.begin(), opt.ridges.end());
    r = solve_matrix(m, eta, op.centering, rhs, smallest, opt.solver);
  }
  out.lfd = r.solution;
  out.ridge = r.ridge;
  out.residual = r.residual_norm;
  out.relative_residual = rhs_norm > 0.0 ? r.residual_norm / rhs_norm : 0.0;
  out.regular = out.relative_residual <= opt.regular_threshold;

  const Vector a = out.lfd.values;
  out.influence = [mc, s, a](const Observation& o) {
    return score_operator(mc, s, o, evaluate_terms(mc, s, o), a);
  };
  return out;
}

InfoReport analyze(const ExpectationEngine& e, const ModelComponents& mc, const ModelState& s,
                   const InfoOptions& opt) {
  check_state(mc, s);
  StructuralFunctions structural = structural_functions(e, mc, s);
  InfoReport rep(info_operator(structural, s, mc.tangent));
  rep.structural = std::move(structural);
  const StructuralFunctions& sf = rep.structural;
  rep.fisher_theta = fisher_theta(e, mc, s);
  rep.adjoint_score = adjoint_score(sf, s, mc.tangent);

  auto& d = rep.diagnostics;
  d.tol_zero = category_tolerance(sf, e, opt);
  rep.category = classify_category(sf.gamma, d.tol_zero, opt.bound_M);
  d.gamma_min = sf.gamma.minCoeff();
  d.gamma_max = sf.gamma.maxCoeff();

  const Matrix m = as_matrix(rep.info_op);
  const double rc = reciprocal_condition(restricted_form(m, s.eta, rep.info_op.centering));
  d.info_condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();

  rep.v_op = v_operator(rep.info_op, rep.adjoint_score, rep.fisher_theta);
  d.min_eig_v = min_eigen_sym(restricted_form(rep.v_op, s.eta, rep.info_op.centering));

  if (mc.p == 0) {
    rep.lfd = Matrix(static_cast<Eigen::Index>(s.eta.size()), 0);
    rep.eff_info = rep.eff_info_cross = Matrix(0, 0);
    return rep;
  }

  LfdResult lfd;
  try {
    lfd = least_favorable_direction(rep.info_op, rep.adjoint_score, rep.category, 0.0, opt);
  } catch (const IllPosed&) {
    if (opt.ridges.empty()) throw;
    const double smallest = *std::min_element(opt.ridges.begin(), opt.ridges.end());
    lfd = least_favorable_direction(rep.info_op, rep.adjoint_score, Category::Cat2, smallest, opt);
  }
  rep.lfd = lfd.lfd;
  d.ridge = lfd.ridge;
  d.regularized = lfd.regularized;
  d.lfd_residual = lfd.residual;
  d.ladder = lfd.ladder;

  const Vector& w = s.eta.masses();
  Matrix route2 = rep.fisher_theta - rep.adjoint_score.transpose() * w.asDiagonal() * rep.lfd;
  rep.eff_info_cross = 0.5 * (route2 + route2.transpose());
  if (std::holds_alternative<ClosedForm>(e)) {
    rep.eff_info = rep.eff_info_cross;
  } else {
    const EfficientInformation ei =
        efficient_information(e, mc, s, rep.lfd, rep.adjoint_score, rep.fisher_theta);
    rep.eff_info = ei.route1;
  }
  rep.min_eig_eff = min_eigen_sym(rep.eff_info);
  return rep;
}

}  // namespace semiinfo
