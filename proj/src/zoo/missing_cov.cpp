#include "hit_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semiinfo {

int missing_cov_cell(double z) { return z < 0.0 ? 0 : 1; }

namespace {

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Outcome {
  double intercept;
  std::vector<double> z;

  double prob1(double theta, std::size_t i) const { return expit(intercept + theta * z[i]); }
  double pmf(double theta, int y, std::size_t i) const {
    const double p = prob1(theta, i);
    return y ? p : 1.0 - p;
  }
  double score(double theta, int y, std::size_t i) const { return (y - prob1(theta, i)) * z[i]; }
};

}  // namespace

ZooModel build_missing_cov(const MissingCovParams& p) {
  const std::size_t m = p.z_values.size();
  if (p.masses.size() != m) throw DimensionError("covariate masses must match support");
  detail::check_probabilities(p.masses, "covariate law");
  for (double v : p.masses)
    if (!(v > 0.0)) throw DomainError("covariate masses must be positive");
  for (std::size_t i = 1; i < m; ++i)
    if (!(p.z_values[i] > p.z_values[i - 1])) throw DomainError("covariate support must increase");
  if (p.select.size() != 2 || p.select[0].size() != 2 || p.select[1].size() != 2)
    throw DimensionError("selection table must be 2 x 2 (y by coarsened cell)");
  for (const auto& row : p.select)
    for (double v : row)
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("selection probabilities must lie in [0, 1]");

  // Support points sit at grid positions 1..m; their covariate values live in z.
  std::vector<double> pts(m);
  for (std::size_t i = 0; i < m; ++i) pts[i] = static_cast<double>(i + 1);
  Grid grid(pts, static_cast<double>(m));
  Vector w = Eigen::Map<const Vector>(p.masses.data(), static_cast<Eigen::Index>(m));
  std::vector<int> cell(m);
  for (std::size_t i = 0; i < m; ++i) cell[i] = missing_cov_cell(p.z_values[i]);
  const Outcome model_y{p.intercept, p.z_values};
  const auto sel = p.select;

  ZooModel model;
  model.id = ModelId::MissingCov;
  model.state = {Vector::Constant(1, p.theta), DiscreteMeasure(grid, w, MeasureKind::Probability)};
  model.expected_category = Category::Cat1;
  // A cell never observed uncoarsened is seen only through its two y-marginals,
  // so more than two support points in it leave a direction unidentified.
  for (int x : {0, 1})
    if (std::count(cell.begin(), cell.end(), x) > 2 && sel[0][static_cast<std::size_t>(x)] == 0.0 &&
        sel[1][static_cast<std::size_t>(x)] == 0.0)
      model.expected_identifiable = false;

  auto& mc = model.components;
  mc.p = 1;
  mc.tangent = TangentKind::L2Zero;
  mc.r = [model_y](const Vector& th, const Observation& o) {
    return o.delta ? std::log(model_y.pmf(th[0], o.label, static_cast<std::size_t>(o.index))) : 0.0;
  };
  mc.r_dot = [model_y](const Vector& th, const Observation& o) {
    return Vector::Constant(1, o.delta ? model_y.score(th[0], o.label, static_cast<std::size_t>(o.index)) : 0.0)
        .eval();
  };
  mc.g = [model_y, cell, m](const Vector& th, const Observation& o) {
    Matrix g = Matrix::Zero(static_cast<Eigen::Index>(m), 1);
    for (std::size_t i = 0; i < m; ++i)
      if (cell[i] == static_cast<int>(o.x)) g(static_cast<Eigen::Index>(i), 0) = model_y.pmf(th[0], o.label, i);
    return g;
  };
  mc.g_dot = [model_y, cell, m](const Vector& th, const Observation& o) {
    Matrix g = Matrix::Zero(static_cast<Eigen::Index>(m), 1);
    for (std::size_t i = 0; i < m; ++i)
      if (cell[i] == static_cast<int>(o.x))
        g(static_cast<Eigen::Index>(i), 0) = model_y.score(th[0], o.label, i) * model_y.pmf(th[0], o.label, i);
    return std::vector<Matrix>{g};
  };
  mc.f = [](const Vector& s, const Observation& o) {
    if (o.delta) return 0.0;
    if (!(s[0] > 0.0)) throw EvaluationError("log of nonpositive coarsened likelihood at " + describe(o));
    return std::log(s[0]);
  };
  mc.f_dot = [](const Vector& s, const Observation& o) {
    return Vector::Constant(1, o.delta ? 0.0 : 1.0 / s[0]).eval();
  };
  mc.f_ddot = [](const Vector& s, const Observation& o) {
    return Matrix::Constant(1, 1, o.delta ? 0.0 : -1.0 / (s[0] * s[0])).eval();
  };
  mc.L = [](const Vector& a, const Observation& o) { return o.delta ? a[o.index] : 0.0; };

  ExactEnumeration exact;
  std::vector<double> base;
  for (std::size_t i = 0; i < m; ++i)
    for (int y : {0, 1}) {
      const double pi = sel[static_cast<std::size_t>(y)][static_cast<std::size_t>(cell[i])];
      if (pi == 0.0) continue;
      Observation o;
      o.id = exact.outcomes.size();
      o.delta = 1;
      o.label = y;
      o.index = static_cast<long>(i);
      o.x = cell[i];
      o.z = Vector::Constant(1, p.z_values[i]);
      exact.outcomes.push_back(o);
      base.push_back(pi);
    }
  for (int x : {0, 1}) {
    if (std::find(cell.begin(), cell.end(), x) == cell.end()) continue;
    for (int y : {0, 1}) {
      const double miss = 1.0 - sel[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
      if (miss == 0.0) continue;
      Observation o;
      o.id = exact.outcomes.size();
      o.label = y;
      o.x = x;
      exact.outcomes.push_back(o);
      base.push_back(miss);
    }
  }
  const ModelComponents comps = mc;
  exact.probability = [comps, base](const ModelState& s, const Observation& o) {
    return base[o.id] * std::exp(log_density(comps, s, o));
  };
  model.exact = std::move(exact);

  model.sampler = [model_y, cell, sel, p](const ModelState& s, std::mt19937_64& rng) {
    const Vector& w = s.eta.masses();
    std::discrete_distribution<std::size_t> zdist(w.data(), w.data() + w.size());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t i = zdist(rng);
    Observation o;
    o.label = unif(rng) < model_y.prob1(s.theta[0], i) ? 1 : 0;
    o.x = cell[i];
    const double pi = sel[static_cast<std::size_t>(o.label)][static_cast<std::size_t>(cell[i])];
    o.delta = unif(rng) < pi ? 1 : 0;
    if (o.delta) {
      o.index = static_cast<long>(i);
      o.z = Vector::Constant(1, p.z_values[i]);
    }
    return o;
  };

  // Displayed closed forms; beta and kappa carry the (1 - pi) factor.
  auto marginal = [model_y, cell, m](const ModelState& s, int y, int x) {
    double q = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (cell[i] == x) q += model_y.pmf(s.theta[0], y, i) * s.eta.masses()[static_cast<Eigen::Index>(i)];
    return q;
  };
  auto& refs = model.refs;
  refs.gamma = [model_y, cell, sel, m](const ModelState& s) {
    Vector g(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      double v = 0.0;
      for (int y : {0, 1})
        v += sel[static_cast<std::size_t>(y)][static_cast<std::size_t>(cell[i])] * model_y.pmf(s.theta[0], y, i);
      g[static_cast<Eigen::Index>(i)] = v;
    }
    return g;
  };
  refs.alpha = [model_y, cell, sel, m](const ModelState& s) {
    Matrix a(static_cast<Eigen::Index>(m), 1);
    for (std::size_t i = 0; i < m; ++i) {
      double v = 0.0;
      for (int y : {0, 1})
        v += sel[static_cast<std::size_t>(y)][static_cast<std::size_t>(cell[i])] *
             model_y.score(s.theta[0], y, i) * model_y.pmf(s.theta[0], y, i);
      a(static_cast<Eigen::Index>(i), 0) = v;
    }
    return a;
  };
  auto pair_kernel = [model_y, cell, sel, m, marginal](const ModelState& s, bool with_score) {
    Matrix k = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t u = 0; u < m; ++u) {
        if (cell[a] != cell[u]) continue;
        double v = 0.0;
        for (int y : {0, 1}) {
          const double miss = 1.0 - sel[static_cast<std::size_t>(y)][static_cast<std::size_t>(cell[u])];
          if (miss == 0.0) continue;
          const double lead = with_score ? model_y.score(s.theta[0], y, u) : 1.0;
          v += miss / marginal(s, y, cell[u]) * lead * model_y.pmf(s.theta[0], y, u) *
               model_y.pmf(s.theta[0], y, a);
        }
        k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(u)) = v;
      }
    return k;
  };
  refs.beta = [pair_kernel](const ModelState& s) { return std::vector<Matrix>{pair_kernel(s, true)}; };
  refs.kappa = [pair_kernel](const ModelState& s) { return pair_kernel(s, false); };
  return model;
}

Prop3Result prop3_check(const MissingCovParams& p, const ZooModel& model, const ModelState& s,
                        double floor) {
  Prop3Result out;
  out.min_selection = 1.0;
  for (const auto& row : p.select)
    for (double v : row) out.min_selection = std::min(out.min_selection, v);
  out.min_conditional_info = std::numeric_limits<double>::infinity();
  for (double z : p.z_values) {
    const double q = expit(p.intercept + s.theta[0] * z);
    out.min_conditional_info = std::min(out.min_conditional_info, z * z * q * (1.0 - q));
  }
  const Vector gamma = reference_gamma(model, s);
  out.gamma_min = gamma.minCoeff();
  out.gamma_max = gamma.maxCoeff();
  if (!(out.min_selection >= floor)) {
    out.failing = "(a)";
    return out;
  }
  if (!(out.min_conditional_info > floor)) {
    out.failing = "(b)";
    return out;
  }
  const InfoReport rep = analyze(make_engine(model, EngineKind::Exact), model.components, s);
  out.min_eig_eff = rep.min_eig_eff;
  if (!(out.min_eig_eff > floor)) {
    out.failing = "efficient information";
    return out;
  }
  out.passed = true;
  return out;
}

}  // namespace semiinfo
