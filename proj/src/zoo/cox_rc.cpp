#include "hit_model.hpp"

#include <cmath>
#include <numeric>

namespace semiinfo {
namespace detail {

Vector cumulative_before(const Vector& w) {
  Vector out(w.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    out[i] = acc;
    acc += w[i];
  }
  return out;
}

void check_probabilities(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw DomainError(std::string(what) + ": empty probability vector");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(what) + ": probability outside [0, 1]");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError(std::string(what) + ": probabilities must sum to one");
}

ZooModel build_hit_model(const HitModelSpec& spec) {
  const std::size_t m = spec.grid.size();
  if (spec.hazard.size() != m || spec.censor_probs.size() != m)
    throw DimensionError("hazard and censoring law must match the grid");
  if (spec.z_values.size() != spec.z_probs.size())
    throw DimensionError("covariate values and probabilities differ in length");
  for (double h : spec.hazard)
    if (!(h > 0.0)) throw DomainError("hazard increments must be positive");
  if (spec.k_max < 1) throw DomainError("k_max must be at least 1");
  check_probabilities(spec.z_probs, "covariate law");
  check_probabilities(spec.censor_probs, "censoring law");

  const double tau = spec.grid.back();
  Grid grid(spec.grid, tau);
  Vector w = Eigen::Map<const Vector>(spec.hazard.data(), static_cast<Eigen::Index>(m));
  const Vector csurv = censoring_survival(spec.censor_probs);
  const int p = spec.has_theta ? 1 : 0;

  ZooModel model;
  model.id = spec.has_theta ? ModelId::CoxRC : ModelId::KaplanMeier;
  model.state = {Vector::Constant(p, spec.theta), DiscreteMeasure(grid, w, MeasureKind::PositiveFinite)};
  model.expected_category = Category::Cat1;

  auto& mc = model.components;
  mc.p = p;
  mc.tangent = TangentKind::L2;
  auto risk = [p](const Vector& theta, const Observation& o) {
    return p ? std::exp(theta[0] * o.z[0]) : 1.0;
  };
  mc.r = [p](const Vector& theta, const Observation& o) {
    return p ? o.delta * o.count * theta[0] * o.z[0] : 0.0;
  };
  mc.r_dot = [p](const Vector&, const Observation& o) {
    Vector v(p);
    if (p) v[0] = o.delta * o.count * o.z[0];
    return v;
  };
  mc.g = [m, risk](const Vector& theta, const Observation& o) {
    Matrix g = Matrix::Zero(static_cast<Eigen::Index>(m), 1);
    g.topRows(o.index + 1).setConstant(risk(theta, o));
    return g;
  };
  mc.g_dot = [m, p, risk](const Vector& theta, const Observation& o) {
    std::vector<Matrix> out;
    if (p) {
      Matrix g = Matrix::Zero(static_cast<Eigen::Index>(m), 1);
      g.topRows(o.index + 1).setConstant(o.z[0] * risk(theta, o));
      out.push_back(g);
    }
    return out;
  };
  mc.f = [](const Vector& x, const Observation&) { return -x[0]; };
  mc.f_dot = [](const Vector&, const Observation&) { return Vector::Constant(1, -1.0); };
  mc.f_ddot = [](const Vector&, const Observation&) { return Matrix::Zero(1, 1); };
  mc.L = [](const Vector& a, const Observation& o) {
    return o.delta ? o.count * a[o.index] : 0.0;
  };

  // Outcomes: (z, X = u_j, delta = 1, K = 1..k_max) and (z, X = u_j, delta = 0).
  ExactEnumeration exact;
  std::vector<double> base;
  for (std::size_t zi = 0; zi < spec.z_values.size(); ++zi) {
    if (spec.z_probs[zi] == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      double log_fact = 0.0;
      for (int k = 1; k <= spec.k_max; ++k) {
        log_fact += std::log(static_cast<double>(k));
        if (csurv[static_cast<Eigen::Index>(j)] == 0.0) break;
        Observation o;
        o.id = exact.outcomes.size();
        o.delta = 1;
        o.count = k;
        o.label = static_cast<int>(zi);
        o.index = static_cast<long>(j);
        o.x = spec.grid[j];
        o.z = Vector::Constant(1, spec.z_values[zi]);
        exact.outcomes.push_back(o);
        base.push_back(spec.z_probs[zi] * csurv[static_cast<Eigen::Index>(j)] * std::exp(-log_fact));
      }
      if (spec.censor_probs[j] > 0.0) {
        Observation o;
        o.id = exact.outcomes.size();
        o.label = static_cast<int>(zi);
        o.index = static_cast<long>(j);
        o.x = spec.grid[j];
        o.z = Vector::Constant(1, spec.z_values[zi]);
        exact.outcomes.push_back(o);
        base.push_back(spec.z_probs[zi] * spec.censor_probs[j]);
      }
    }
  }
  const ModelComponents comps = mc;
  exact.probability = [comps, base](const ModelState& s, const Observation& o) {
    return base[o.id] * std::exp(log_density(comps, s, o));
  };
  // A k_max too small for the hazard leaves mass unenumerated; refuse to build.
  outcome_probabilities(exact, model.state);
  model.exact = std::move(exact);

  model.sampler = [spec, m](const ModelState& s, std::mt19937_64& rng) {
    std::discrete_distribution<std::size_t> zdist(spec.z_probs.begin(), spec.z_probs.end());
    std::discrete_distribution<std::size_t> cdist(spec.censor_probs.begin(), spec.censor_probs.end());
    const std::size_t zi = zdist(rng);
    const std::size_t ci = cdist(rng);
    const double z = spec.z_values[zi];
    const double risk = spec.has_theta ? std::exp(s.theta[0] * z) : 1.0;
    Observation o;
    o.label = static_cast<int>(zi);
    o.z = Vector::Constant(1, z);
    for (std::size_t i = 0; i < m; ++i) {
      std::poisson_distribution<int> hits(risk * s.eta.masses()[static_cast<Eigen::Index>(i)]);
      const int k = hits(rng);
      if (k > 0) {
        o.delta = 1;
        o.count = k;
        o.index = static_cast<long>(i);
        break;
      }
      if (i == ci) {
        o.index = static_cast<long>(i);
        break;
      }
    }
    o.x = spec.grid[static_cast<std::size_t>(o.index)];
    return o;
  };

  // E[Z^power exp(theta Z) I(X >= u_i)].
  auto risk_moment = [spec, csurv](const ModelState& s, int power) {
    const Vector& w = s.eta.masses();
    const Vector before = cumulative_before(w);
    const double theta = spec.has_theta ? s.theta[0] : 0.0;
    Vector out = Vector::Zero(w.size());
    for (std::size_t zi = 0; zi < spec.z_values.size(); ++zi) {
      const double z = spec.z_values[zi];
      const double e = std::exp(theta * z);
      const double zp = power ? std::pow(z, power) : 1.0;
      out.array() += spec.z_probs[zi] * zp * e * (-e * before.array()).exp() * csurv.array();
    }
    return out;
  };
  auto& refs = model.refs;
  refs.gamma = [risk_moment](const ModelState& s) { return risk_moment(s, 0); };
  refs.kappa = [](const ModelState& s) {
    const auto n = static_cast<Eigen::Index>(s.eta.size());
    return Matrix::Zero(n, n).eval();
  };
  if (p) {
    refs.alpha = [risk_moment](const ModelState& s) { return Matrix(risk_moment(s, 1)); };
    refs.beta = [](const ModelState& s) {
      const auto n = static_cast<Eigen::Index>(s.eta.size());
      return std::vector<Matrix>{Matrix::Zero(n, n)};
    };
    refs.adjoint = refs.alpha;
    refs.lfd = [risk_moment](const ModelState& s) {
      return Matrix(risk_moment(s, 1).cwiseQuotient(risk_moment(s, 0)));
    };
  }
  return model;
}

}  // namespace detail

ZooModel build_cox_rc(const CoxRCParams& p) {
  detail::HitModelSpec spec;
  spec.grid = p.grid;
  spec.hazard = p.hazard;
  spec.z_values = p.z_values;
  spec.z_probs = p.z_probs;
  spec.censor_probs = p.censor_probs;
  spec.theta = p.theta;
  spec.k_max = p.k_max;
  spec.has_theta = true;
  return detail::build_hit_model(spec);
}

}  // namespace semiinfo
