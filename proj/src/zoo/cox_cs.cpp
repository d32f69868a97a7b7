#include "hit_model.hpp"

#include <algorithm>
#include <cmath>

namespace semiinfo {

namespace {

std::vector<double> examination_law(const CoxCSParams& p) {
  if (!p.u_probs.empty()) return p.u_probs;
  return std::vector<double>(p.grid.size(), 1.0 / static_cast<double>(p.grid.size()));
}

double linear_predictor(const Vector& theta, const Vector& z) { return theta.dot(z); }

}  // namespace

CoxCSParams cox_cs_refined(std::size_t count, double theta) {
  if (count < 3) throw DomainError("refinement needs at least three points");
  CoxCSParams p;
  p.theta = theta;
  p.grid.resize(count);
  p.hazard.resize(count);
  auto cum = [](double t) { return 0.15 * t + 0.05 * t * t; };
  double prev = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = 3.0 * static_cast<double>(i + 1) / static_cast<double>(count);
    p.grid[i] = u;
    p.hazard[i] = cum(u) - cum(prev);
    prev = u;
  }
  p.grid.back() = 3.0;
  return p;
}

ZooModel build_cox_cs(const CoxCSParams& p) {
  const std::size_t m = p.grid.size();
  if (p.hazard.size() != m) throw DimensionError("hazard must match the grid");
  if (p.z_values.size() != p.z_probs.size())
    throw DimensionError("covariate values and probabilities differ in length");
  for (double h : p.hazard)
    if (!(h > 0.0)) throw DomainError("hazard increments must be positive");
  const std::vector<double> u_probs = examination_law(p);
  if (u_probs.size() != m) throw DimensionError("examination law must match the grid");
  detail::check_probabilities(p.z_probs, "covariate law");
  detail::check_probabilities(u_probs, "examination law");

  const int dim = p.duplicate_covariate ? 2 : 1;
  Grid grid(p.grid, p.grid.back());
  Vector w = Eigen::Map<const Vector>(p.hazard.data(), static_cast<Eigen::Index>(m));

  ZooModel model;
  model.id = ModelId::CoxCS;
  Vector theta = Vector::Zero(dim);
  theta[0] = p.theta;
  model.state = {theta, DiscreteMeasure(grid, w, MeasureKind::PositiveFinite)};
  model.expected_category = Category::Cat2;
  model.expected_identifiable = !p.duplicate_covariate;

  auto& mc = model.components;
  mc.p = dim;
  mc.tangent = TangentKind::L2;
  mc.L_is_zero = true;
  mc.r = [](const Vector&, const Observation&) { return 0.0; };
  mc.r_dot = [dim](const Vector&, const Observation&) { return Vector::Zero(dim).eval(); };
  mc.g = [m](const Vector& th, const Observation& o) {
    Matrix g = Matrix::Zero(static_cast<Eigen::Index>(m), 1);
    g.topRows(o.index + 1).setConstant(std::exp(linear_predictor(th, o.z)));
    return g;
  };
  mc.g_dot = [m, dim](const Vector& th, const Observation& o) {
    std::vector<Matrix> out;
    const double e = std::exp(linear_predictor(th, o.z));
    for (int j = 0; j < dim; ++j) {
      Matrix g = Matrix::Zero(static_cast<Eigen::Index>(m), 1);
      g.topRows(o.index + 1).setConstant(o.z[j] * e);
      out.push_back(g);
    }
    return out;
  };
  mc.f = [](const Vector& x, const Observation& o) {
    if (o.delta) {
      if (!(x[0] > 0.0)) throw EvaluationError("log(1 - exp(-x)) undefined at " + describe(o));
      return std::log(-std::expm1(-x[0]));
    }
    return -x[0];
  };
  mc.f_dot = [](const Vector& x, const Observation& o) {
    return Vector::Constant(1, o.delta ? 1.0 / std::expm1(x[0]) : -1.0).eval();
  };
  mc.f_ddot = [](const Vector& x, const Observation& o) {
    const double em = std::expm1(x[0]);
    return Matrix::Constant(1, 1, o.delta ? -std::exp(x[0]) / (em * em) : 0.0).eval();
  };
  mc.L = [](const Vector&, const Observation&) { return 0.0; };

  auto covariate = [dim](double z) { return Vector::Constant(dim, z).eval(); };

  ExactEnumeration exact;
  std::vector<double> base;
  for (std::size_t zi = 0; zi < p.z_values.size(); ++zi) {
    if (p.z_probs[zi] == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (u_probs[j] == 0.0) continue;
      for (int delta : {1, 0}) {
        Observation o;
        o.id = exact.outcomes.size();
        o.delta = delta;
        o.label = static_cast<int>(zi);
        o.index = static_cast<long>(j);
        o.x = p.grid[j];
        o.z = covariate(p.z_values[zi]);
        exact.outcomes.push_back(o);
        base.push_back(p.z_probs[zi] * u_probs[j]);
      }
    }
  }
  const ModelComponents comps = mc;
  exact.probability = [comps, base](const ModelState& s, const Observation& o) {
    return base[o.id] * std::exp(log_density(comps, s, o));
  };
  model.exact = std::move(exact);

  model.sampler = [p, u_probs, covariate](const ModelState& s, std::mt19937_64& rng) {
    std::discrete_distribution<std::size_t> zdist(p.z_probs.begin(), p.z_probs.end());
    std::discrete_distribution<std::size_t> udist(u_probs.begin(), u_probs.end());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Observation o;
    const std::size_t zi = zdist(rng);
    const std::size_t j = udist(rng);
    o.label = static_cast<int>(zi);
    o.index = static_cast<long>(j);
    o.x = p.grid[j];
    o.z = covariate(p.z_values[zi]);
    const double x = std::exp(s.theta.dot(o.z)) * cumulative(Direction::ones(s.eta.size()), s.eta, o.x);
    o.delta = unif(rng) < -std::expm1(-x) ? 1 : 0;
    return o;
  };

  // kappa(s, u) = sum_k P(U = u_k) I(k >= max(s, u)) s0(u_k); beta likewise with s1.
  auto tail_kernel = [p, u_probs](const Vector& s_k) {
    const auto n = s_k.size();
    Matrix out(n, n);
    Vector tail(n);
    double acc = 0.0;
    for (Eigen::Index k = n - 1; k >= 0; --k) {
      acc += u_probs[static_cast<std::size_t>(k)] * s_k[k];
      tail[k] = acc;
    }
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index l = 0; l < n; ++l) out(i, l) = tail[std::max(i, l)];
    return out;
  };
  auto& refs = model.refs;
  refs.gamma = [](const ModelState& s) { return Vector::Zero(static_cast<Eigen::Index>(s.eta.size())).eval(); };
  refs.alpha = [dim](const ModelState& s) {
    return Matrix::Zero(static_cast<Eigen::Index>(s.eta.size()), dim).eval();
  };
  refs.kappa = [p, tail_kernel](const ModelState& s) { return tail_kernel(cs_profile(p, s).s0); };
  refs.beta = [p, dim, tail_kernel](const ModelState& s) {
    return std::vector<Matrix>(static_cast<std::size_t>(dim), tail_kernel(cs_profile(p, s).s1));
  };
  refs.lfd = [p, dim](const ModelState& s) {
    const Vector a = cs_reference_lfd(p, s);
    Matrix out(a.size(), dim);
    for (int j = 0; j < dim; ++j) out.col(j) = a;
    return out;
  };
  return model;
}

CurrentStatusProfile cs_profile(const CoxCSParams& p, const ModelState& s) {
  const Vector& w = s.eta.masses();
  const double slope = s.theta.sum();  // theta' (z, ..., z) = z sum(theta)
  CurrentStatusProfile out;
  out.lambda_cum = detail::cumulative_before(w) + w;
  out.s0 = Vector::Zero(w.size());
  out.s1 = Vector::Zero(w.size());
  for (std::size_t zi = 0; zi < p.z_values.size(); ++zi) {
    const double z = p.z_values[zi];
    const double e = std::exp(slope * z);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double odds = 1.0 / std::expm1(e * out.lambda_cum[i]);
      out.s0[i] += p.z_probs[zi] * e * e * odds;
      out.s1[i] += p.z_probs[zi] * z * e * e * odds;
    }
  }
  out.zeta = out.s1.cwiseQuotient(out.s0);
  return out;
}

namespace {

// Central difference quotient of v on the grid with neighbors at distance k,
// one-sided where the stencil leaves the grid.
double difference(const Vector& v, const std::vector<double>& u, Eigen::Index i, Eigen::Index k) {
  const Eigen::Index n = v.size();
  const Eigen::Index lo = std::max<Eigen::Index>(0, i - k);
  const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + k);
  return (v[hi] - v[lo]) / (u[static_cast<std::size_t>(hi)] - u[static_cast<std::size_t>(lo)]);
}

}  // namespace

Vector cs_reference_lfd(const CoxCSParams& p, const ModelState& s) {
  const CurrentStatusProfile prof = cs_profile(p, s);
  const Vector& w = s.eta.masses();
  const auto n = w.size();
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double du = p.grid[static_cast<std::size_t>(i)] - (i ? p.grid[static_cast<std::size_t>(i - 1)] : 0.0);
    const double lambda = w[i] / du;
    out[i] = prof.zeta[i] + prof.lambda_cum[i] * difference(prof.zeta, p.grid, i, 1) / lambda;
  }
  return out;
}

double cs_truncation_bound(const CoxCSParams& p, const ModelState& s) {
  const CurrentStatusProfile prof = cs_profile(p, s);
  const auto n = prof.zeta.size();
  double bound = 0.0;
  for (Eigen::Index i = 2; i + 2 < n; ++i) {
    const double dh = difference(prof.zeta, p.grid, i, 1);
    const double d2h = difference(prof.zeta, p.grid, i, 2);
    bound = std::max(bound, prof.lambda_cum[i] * std::abs(dh - d2h) / 3.0);
  }
  return bound;
}

double cs_efficient_score_formula(const CoxCSParams& p, const ModelState& s, const Observation& o) {
  const CurrentStatusProfile prof = cs_profile(p, s);
  const double lam = prof.lambda_cum[o.index];
  const double e = std::exp(s.theta.dot(o.z));
  const double x = e * lam;
  const double fdot = o.delta ? 1.0 / std::expm1(x) : -1.0;
  return fdot * e * lam * (o.z[0] - prof.zeta[o.index]);
}

}  // namespace semiinfo
