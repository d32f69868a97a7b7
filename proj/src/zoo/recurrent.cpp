#include "hit_model.hpp"

#include <algorithm>
#include <cmath>

namespace semiinfo {

Transformation transformation_identity() {
  return {"identity", [](double x) { return x; }, [](double) { return 1.0; },
          [](double) { return 0.0; }, [](double) { return 0.0; }};
}

Transformation transformation_log1p() {
  return {"log1p", [](double x) { return std::log1p(x); },
          [](double x) { return 1.0 / (1.0 + x); },
          [](double x) { return -1.0 / ((1.0 + x) * (1.0 + x)); },
          [](double x) { return 2.0 / ((1.0 + x) * (1.0 + x) * (1.0 + x)); }};
}

Transformation parse_transformation(const std::string& name) {
  if (name == "identity") return transformation_identity();
  if (name == "log1p") return transformation_log1p();
  throw ConfigError("unknown transformation '" + name + "'");
}

namespace {

struct CellLayout {
  std::vector<double> lo, hi;

  std::size_t size() const { return lo.size(); }
  double length(std::size_t i) const { return hi[i] - lo[i]; }
  double fraction(std::size_t i, double t) const {
    return std::clamp((t - lo[i]) / length(i), 0.0, 1.0);
  }
  std::size_t cell_of(double t) const {
    for (std::size_t i = 0; i < hi.size(); ++i)
      if (t <= hi[i]) return i;
    return hi.size() - 1;
  }
};

// e^{theta z_i} frac_i(t) for each cell.
Vector exposure(const CellLayout& cells, const Vector& z, double theta, double t) {
  Vector v(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = std::exp(theta * z[static_cast<Eigen::Index>(i)]) * cells.fraction(i, t);
  return v;
}

}  // namespace

ZooModel build_recurrent(const RecurrentParams& p) {
  const std::size_t m = p.grid.size();
  if (p.hazard.size() != m || p.censor_probs.size() != m)
    throw DimensionError("hazard and censoring law must match the grid");
  if (p.z_paths.size() != p.z_probs.size()) throw DimensionError("covariate paths and probabilities differ");
  for (const auto& path : p.z_paths)
    if (path.size() != m) throw DimensionError("covariate paths need one value per cell");
  for (double h : p.hazard)
    if (!(h > 0.0)) throw DomainError("hazard increments must be positive");
  detail::check_probabilities(p.z_probs, "covariate law");
  detail::check_probabilities(p.censor_probs, "censoring law");
  const Transformation tr = p.transform;
  if (!tr.G || !tr.G1 || !tr.G2 || !tr.G3) throw DomainError("transformation needs G and three derivatives");
  for (double x : {0.0, 1.0, 10.0})
    if (!(tr.G1(x) > 0.0)) throw DomainError("transformation must be strictly increasing");

  CellLayout cells;
  for (std::size_t i = 0; i < m; ++i) {
    cells.lo.push_back(i ? p.grid[i - 1] : 0.0);
    cells.hi.push_back(p.grid[i]);
  }
  Grid grid(p.grid, p.grid.back());
  Vector w = Eigen::Map<const Vector>(p.hazard.data(), static_cast<Eigen::Index>(m));

  ZooModel model;
  model.id = ModelId::RecurrentTransform;
  model.state = {Vector::Constant(1, p.theta), DiscreteMeasure(grid, w, MeasureKind::PositiveFinite)};
  model.expected_category = Category::Cat1;

  auto& mc = model.components;
  mc.p = 1;
  mc.tangent = TangentKind::L2;
  mc.r = [cells](const Vector& th, const Observation& o) {
    double v = 0.0;
    for (double t : o.times) v += o.z[static_cast<Eigen::Index>(cells.cell_of(t))];
    return th[0] * v;
  };
  mc.r_dot = [cells](const Vector&, const Observation& o) {
    double v = 0.0;
    for (double t : o.times) v += o.z[static_cast<Eigen::Index>(cells.cell_of(t))];
    return Vector::Constant(1, v).eval();
  };
  // Columns: one per event time, then the end of follow-up.
  mc.g = [cells](const Vector& th, const Observation& o) {
    const auto d = static_cast<Eigen::Index>(o.times.size()) + 1;
    Matrix g(static_cast<Eigen::Index>(cells.size()), d);
    for (Eigen::Index k = 0; k + 1 < d; ++k)
      g.col(k) = exposure(cells, o.z, th[0], o.times[static_cast<std::size_t>(k)]);
    g.col(d - 1) = exposure(cells, o.z, th[0], o.x);
    return g;
  };
  mc.g_dot = [cells](const Vector& th, const Observation& o) {
    const auto d = static_cast<Eigen::Index>(o.times.size()) + 1;
    Matrix g(static_cast<Eigen::Index>(cells.size()), d);
    for (Eigen::Index k = 0; k + 1 < d; ++k)
      g.col(k) = exposure(cells, o.z, th[0], o.times[static_cast<std::size_t>(k)]);
    g.col(d - 1) = exposure(cells, o.z, th[0], o.x);
    return std::vector<Matrix>{o.z.asDiagonal() * g};
  };
  mc.f = [tr](const Vector& x, const Observation& o) {
    const auto n = x.size() - 1;
    double v = -tr.G(x[n]);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double d = tr.G1(x[k]);
      if (!(d > 0.0)) throw EvaluationError("transformation derivative not positive at " + describe(o));
      v += std::log(d);
    }
    return v;
  };
  mc.f_dot = [tr](const Vector& x, const Observation&) {
    const auto n = x.size() - 1;
    Vector v(x.size());
    for (Eigen::Index k = 0; k < n; ++k) v[k] = tr.G2(x[k]) / tr.G1(x[k]);
    v[n] = -tr.G1(x[n]);
    return v;
  };
  mc.f_ddot = [tr](const Vector& x, const Observation&) {
    const auto n = x.size() - 1;
    Matrix v = Matrix::Zero(x.size(), x.size());
    for (Eigen::Index k = 0; k < n; ++k) {
      const double g1 = tr.G1(x[k]), g2 = tr.G2(x[k]), g3 = tr.G3(x[k]);
      v(k, k) = (g3 * g1 - g2 * g2) / (g1 * g1);
    }
    v(n, n) = -tr.G2(x[n]);
    return v;
  };
  mc.L = [cells](const Vector& a, const Observation& o) {
    double v = 0.0;
    for (double t : o.times) v += a[static_cast<Eigen::Index>(cells.cell_of(t))];
    return v;
  };

  // Event times enumerated on Gauss-Legendre nodes; follow-up stops at the
  // second event, so at most two times are recorded.
  std::vector<double> gx, gw;
  gauss_legendre(p.nodes, gx, gw);
  struct Node {
    double t, weight;  // weight already divided by the cell length (density of lambda)
  };
  auto cell_nodes = [&](double lo, double hi, double len) {
    std::vector<Node> out;
    for (std::size_t k = 0; k < gx.size(); ++k)
      out.push_back({lo + (hi - lo) * (gx[k] + 1.0) / 2.0, (hi - lo) * gw[k] / 2.0 / len});
    return out;
  };

  ExactEnumeration exact;
  std::vector<double> base;
  auto add = [&](std::size_t zi, std::size_t ci, std::vector<double> times, double end, double weight) {
    Observation o;
    o.id = exact.outcomes.size();
    o.label = static_cast<int>(zi);
    o.index = static_cast<long>(ci);
    o.count = static_cast<int>(times.size());
    o.times = std::move(times);
    o.x = end;
    o.z = Eigen::Map<const Vector>(p.z_paths[zi].data(), static_cast<Eigen::Index>(m));
    exact.outcomes.push_back(std::move(o));
    base.push_back(weight);
  };
  for (std::size_t zi = 0; zi < p.z_paths.size(); ++zi) {
    if (p.z_probs[zi] == 0.0) continue;
    for (std::size_t ci = 0; ci < m; ++ci) {
      if (p.censor_probs[ci] == 0.0) continue;
      const double pw = p.z_probs[zi] * p.censor_probs[ci];
      const double c = p.grid[ci];
      add(zi, ci, {}, c, pw);
      for (std::size_t a = 0; a <= ci; ++a)
        for (const Node& n1 : cell_nodes(cells.lo[a], cells.hi[a], cells.length(a))) {
          add(zi, ci, {n1.t}, c, pw * n1.weight);
          for (std::size_t b = a; b <= ci; ++b) {
            const double lo = b == a ? n1.t : cells.lo[b];
            for (const Node& n2 : cell_nodes(lo, cells.hi[b], cells.length(b)))
              add(zi, ci, {n1.t, n2.t}, n2.t, pw * n1.weight * n2.weight);
          }
        }
    }
  }
  const ModelComponents comps = mc;
  exact.probability = [comps, base](const ModelState& s, const Observation& o) {
    return base[o.id] * std::exp(log_density(comps, s, o));
  };
  model.exact = std::move(exact);

  // Cell average of E[Y(u) exp(theta Z(u)) G'(x(u))], with
  // Y(u) = I(C >= u) I(fewer than two events before u).
  const Vector csurv = censoring_survival(p.censor_probs);
  model.refs.gamma = [p, cells, csurv, tr, gx, gw](const ModelState& s) {
    const Vector& w = s.eta.masses();
    const double theta = s.theta[0];
    Vector out = Vector::Zero(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double acc = 0.0;
      for (std::size_t zi = 0; zi < p.z_paths.size(); ++zi) {
        const Vector z = Eigen::Map<const Vector>(p.z_paths[zi].data(), static_cast<Eigen::Index>(cells.size()));
        for (std::size_t k = 0; k < gx.size(); ++k) {
          const double u = cells.lo[i] + cells.length(i) * (gx[k] + 1.0) / 2.0;
          const double x = exposure(cells, z, theta, u).dot(w);
          const double G = tr.G(x);
          const double at_risk = std::exp(-G) * (1.0 + G);
          acc += p.z_probs[zi] * gw[k] / 2.0 * std::exp(theta * z[static_cast<Eigen::Index>(i)]) * tr.G1(x) *
                 at_risk;
        }
      }
      out[static_cast<Eigen::Index>(i)] = csurv[static_cast<Eigen::Index>(i)] * acc;
    }
    return out;
  };
  return model;
}

}  // namespace semiinfo
