#include "semiinfo/zoo.hpp"

#include <cmath>
#include <numbers>

namespace semiinfo {

const char* to_string(ModelId id) {
  switch (id) {
    case ModelId::CoxRC: return "cox_rc";
    case ModelId::CoxCS: return "cox_cs";
    case ModelId::RecurrentTransform: return "recurrent";
    case ModelId::KaplanMeier: return "kaplan_meier";
    case ModelId::Mixture: return "mixture";
    case ModelId::MissingCov: return "missing_cov";
  }
  return "unknown";
}

const std::vector<ModelId>& all_models() {
  static const std::vector<ModelId> ids{ModelId::CoxRC,       ModelId::CoxCS,
                                        ModelId::RecurrentTransform, ModelId::KaplanMeier,
                                        ModelId::Mixture,     ModelId::MissingCov};
  return ids;
}

ModelId parse_model_id(const std::string& s) {
  for (ModelId id : all_models())
    if (s == to_string(id)) return id;
  throw ConfigError("unknown model id '" + s + "'");
}

EngineKind parse_engine_kind(const std::string& s) {
  if (s == "exact") return EngineKind::Exact;
  if (s == "monte_carlo") return EngineKind::MonteCarlo;
  if (s == "closed_form") return EngineKind::ClosedForm;
  throw ConfigError("unknown engine kind '" + s + "'");
}

namespace {

template <class F>
const F& require(const F& f, const ZooModel& m, const char* what) {
  if (!f) throw NotAvailable(std::string(what) + " reference not available for " + to_string(m.id));
  return f;
}

bool centered(const ZooModel& m) { return m.components.tangent == TangentKind::L2Zero; }

// Remove the eta-mean along the first (output) argument.
Matrix center_rows(const Matrix& x, const Vector& w) {
  return x.rowwise() - (w.transpose() * x) / w.sum();
}

Matrix center_cols(const Matrix& x, const Vector& w) {
  return x.colwise() - (x * w) / w.sum();
}

}  // namespace

// Under L2Zero the structural functions are only determined up to terms that
// vanish against centered directions; references are reported in the same
// canonical form as the pipeline (alpha and the first argument of beta
// centered, kappa centered in both arguments).
Vector reference_gamma(const ZooModel& m, const ModelState& s) {
  return require(m.refs.gamma, m, "gamma")(s);
}

Matrix reference_kappa(const ZooModel& m, const ModelState& s) {
  Matrix k = require(m.refs.kappa, m, "kappa")(s);
  if (centered(m)) k = center_cols(center_rows(k, s.eta.masses()), s.eta.masses());
  return k;
}

Matrix reference_alpha(const ZooModel& m, const ModelState& s) {
  Matrix a = require(m.refs.alpha, m, "alpha")(s);
  if (centered(m)) a = center_rows(a, s.eta.masses());
  return a;
}

std::vector<Matrix> reference_beta(const ZooModel& m, const ModelState& s) {
  auto b = require(m.refs.beta, m, "beta")(s);
  if (centered(m))
    for (auto& x : b) x = center_rows(x, s.eta.masses());
  return b;
}

Matrix reference_adjoint(const ZooModel& m, const ModelState& s) {
  if (m.refs.adjoint) return m.refs.adjoint(s);
  if (m.refs.alpha && m.refs.beta) {
    Matrix a = reference_alpha(m, s);
    const auto b = reference_beta(m, s);
    for (std::size_t j = 0; j < b.size(); ++j)
      a.col(static_cast<Eigen::Index>(j)) += b[j] * s.eta.masses();
    if (centered(m)) a = center_rows(a, s.eta.masses());
    return a;
  }
  throw NotAvailable(std::string("adjoint score reference not available for ") + to_string(m.id));
}

Matrix reference_lfd(const ZooModel& m, const ModelState& s) {
  return require(m.refs.lfd, m, "least favorable direction")(s);
}

ExpectationEngine make_engine(const ZooModel& model, EngineKind kind, std::size_t n,
                              std::uint64_t seed) {
  switch (kind) {
    case EngineKind::Exact:
      if (!model.exact)
        throw NotAvailable(std::string("no exact engine for ") + to_string(model.id));
      return *model.exact;
    case EngineKind::MonteCarlo:
      if (!model.sampler)
        throw NotAvailable(std::string("no Monte Carlo sampler for ") + to_string(model.id));
      if (n == 0) throw DomainError("Monte Carlo engine needs n > 0");
      return MonteCarlo{model.sampler, n, seed};
    case EngineKind::ClosedForm: {
      if (!model.refs.gamma || !model.refs.kappa)
        throw NotAvailable(std::string("no closed-form engine for ") + to_string(model.id));
      ZooModel copy = model;
      auto structural = [copy](const ModelState& s) {
        StructuralFunctions sf;
        const auto m = static_cast<Eigen::Index>(s.eta.size());
        const int p = copy.components.p;
        sf.gamma = reference_gamma(copy, s);
        sf.kappa = reference_kappa(copy, s);
        sf.alpha = p ? reference_alpha(copy, s) : Matrix(m, 0);
        sf.beta = p ? reference_beta(copy, s) : std::vector<Matrix>{};
        return sf;
      };
      return ClosedForm{to_string(model.id), structural};
    }
  }
  throw ConfigError("unknown engine kind");
}

Vector censoring_survival(const std::vector<double>& censor_probs) {
  const auto m = static_cast<Eigen::Index>(censor_probs.size());
  Vector out(m);
  double tail = 0.0;
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    tail += censor_probs[static_cast<std::size_t>(i)];
    out[i] = tail;
  }
  return out;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw DomainError("Gauss-Legendre needs at least one node");
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(n - 1 - i);
    x[a] = -z;
    x[b] = z;
    w[a] = w[b] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace semiinfo
