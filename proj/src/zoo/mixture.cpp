#include "hit_model.hpp"

#include <cmath>

namespace semiinfo {

namespace {

double binomial_pmf(int n, int k, double q) {
  const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_choose + k * std::log(q) + (n - k) * std::log1p(-q));
}

}  // namespace

ZooModel build_mixture(const MixtureParams& p) {
  const std::size_t m = p.masses.size();
  if (m < 2) throw DomainError("mixture needs at least two support points");
  if (p.trials < 1) throw DomainError("mixture needs at least one trial");
  detail::check_probabilities(p.masses, "mixing distribution");
  for (double v : p.masses)
    if (!(v > 0.0)) throw DomainError("mixing masses must be positive");

  // Support points z = 0..m-1 sit at grid positions 1..m.
  std::vector<double> pts(m);
  for (std::size_t i = 0; i < m; ++i) pts[i] = static_cast<double>(i + 1);
  Grid grid(pts, static_cast<double>(m));
  Vector w = Eigen::Map<const Vector>(p.masses.data(), static_cast<Eigen::Index>(m));

  const int outcomes = p.trials + 1;
  Matrix kernel(outcomes, static_cast<Eigen::Index>(m));  // p(x | z_i)
  for (int x = 0; x < outcomes; ++x)
    for (std::size_t i = 0; i < m; ++i) {
      const double q = p.constant_kernel ? 0.5 : (static_cast<double>(i) + 0.5) / static_cast<double>(m);
      kernel(x, static_cast<Eigen::Index>(i)) = binomial_pmf(p.trials, x, q);
    }

  ZooModel model;
  model.id = ModelId::Mixture;
  model.state = {Vector(0), DiscreteMeasure(grid, w, MeasureKind::Probability)};
  model.expected_category = Category::Cat2;
  model.expected_identifiable = !p.constant_kernel && m <= static_cast<std::size_t>(p.trials) + 1;

  auto& mc = model.components;
  mc.p = 0;
  mc.tangent = TangentKind::L2Zero;
  mc.L_is_zero = true;
  mc.r = [](const Vector&, const Observation&) { return 0.0; };
  mc.r_dot = [](const Vector&, const Observation&) { return Vector(0); };
  mc.g = [kernel](const Vector&, const Observation& o) { return Matrix(kernel.row(o.label).transpose()); };
  mc.g_dot = [](const Vector&, const Observation&) { return std::vector<Matrix>{}; };
  mc.f = [](const Vector& x, const Observation& o) {
    if (!(x[0] > 0.0)) throw EvaluationError("mixture density is not positive at " + describe(o));
    return std::log(x[0]);
  };
  mc.f_dot = [](const Vector& x, const Observation&) { return Vector::Constant(1, 1.0 / x[0]).eval(); };
  mc.f_ddot = [](const Vector& x, const Observation&) {
    return Matrix::Constant(1, 1, -1.0 / (x[0] * x[0])).eval();
  };
  mc.L = [](const Vector&, const Observation&) { return 0.0; };

  ExactEnumeration exact;
  for (int x = 0; x < outcomes; ++x) {
    Observation o;
    o.id = static_cast<std::size_t>(x);
    o.label = x;
    o.x = x;
    exact.outcomes.push_back(o);
  }
  const ModelComponents comps = mc;
  exact.probability = [comps](const ModelState& s, const Observation& o) {
    return std::exp(log_density(comps, s, o));
  };
  model.exact = std::move(exact);

  model.sampler = [kernel, outcomes](const ModelState& s, std::mt19937_64& rng) {
    const Vector& w = s.eta.masses();
    std::discrete_distribution<Eigen::Index> zdist(w.data(), w.data() + w.size());
    const Eigen::Index zi = zdist(rng);
    std::vector<double> px(static_cast<std::size_t>(outcomes));
    for (int x = 0; x < outcomes; ++x) px[static_cast<std::size_t>(x)] = kernel(x, zi);
    std::discrete_distribution<int> xdist(px.begin(), px.end());
    Observation o;
    o.label = xdist(rng);
    o.x = o.label;
    return o;
  };

  auto& refs = model.refs;
  refs.gamma = [](const ModelState& s) { return Vector::Zero(static_cast<Eigen::Index>(s.eta.size())).eval(); };
  // E[q(X)^{-2} (p(X|.) - q(X)) (p(X|u) - q(X))].
  refs.kappa = [kernel](const ModelState& s) {
    const Vector q = kernel * s.eta.masses();
    const Matrix dev = kernel.colwise() - q;
    return (dev.transpose() * q.cwiseInverse().asDiagonal() * dev).eval();
  };
  return model;
}

Direction mixture_cdf_chi_dot(const DiscreteMeasure& eta, double z0) {
  Direction out = Direction::zeros(eta.size());
  const long last = eta.grid().last_at_or_below(z0);
  for (long i = 0; i <= last; ++i) out.values[i] = 1.0;
  return center(out, eta);
}

Direction mixture_point_chi_dot(const DiscreteMeasure& eta, double z0) {
  Direction out = Direction::zeros(eta.size());
  const long i = eta.grid().last_at_or_below(z0);
  if (i < 0 || eta.grid()[static_cast<std::size_t>(i)] != z0)
    throw DomainError("point-mass functional needs z0 on the grid");
  out.values[i] = 1.0;
  return center(out, eta);
}

}  // namespace semiinfo
