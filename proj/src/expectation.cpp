#include "semiinfo/expectation.hpp"

#include <algorithm>
#include <cmath>

namespace semiinfo {

const char* engine_kind(const ExpectationEngine& e) {
  switch (e.index()) {
    case 0: return "exact";
    case 1: return "monte_carlo";
    default: return "closed_form";
  }
}

bool is_exact(const ExpectationEngine& e) { return !std::holds_alternative<MonteCarlo>(e); }

Vector outcome_probabilities(const ExactEnumeration& e, const ModelState& s) {
  Vector p(static_cast<Eigen::Index>(e.outcomes.size()));
  for (std::size_t i = 0; i < e.outcomes.size(); ++i) {
    const double v = e.probability(s, e.outcomes[i]);
    if (!(v >= 0.0) || !std::isfinite(v))
      throw EvaluationError("invalid outcome probability at " + describe(e.outcomes[i]));
    p[static_cast<Eigen::Index>(i)] = v;
  }
  const double total = p.sum();
  if (std::abs(total - 1.0) > e.normalization_tol)
    throw DomainError("outcome probabilities sum to " + std::to_string(total) + ", not 1");
  return p;
}

namespace {

// Welford accumulator; blocks are merged in fixed order (Chan et al.).
struct Moments {
  double count = 0.0;
  Vector mean;
  Vector m2;

  void add(const Vector& x) {
    if (count == 0.0) {
      mean = Vector::Zero(x.size());
      m2 = Vector::Zero(x.size());
    } else if (x.size() != mean.size()) {
      throw DimensionError("functional returned vectors of varying length");
    }
    count += 1.0;
    const Vector delta = x - mean;
    mean += delta / count;
    m2 += (delta.array() * (x - mean).array()).matrix();
  }

  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    if (count == 0.0) {
      *this = o;
      return;
    }
    const double total = count + o.count;
    const Vector delta = o.mean - mean;
    mean += delta * (o.count / total);
    m2 += o.m2 + (delta.array().square() * (count * o.count / total)).matrix();
    count = total;
  }
};

std::size_t block_size(std::size_t n, int b) {
  const auto blocks = static_cast<std::size_t>(kMonteCarloBlocks);
  return n / blocks + (static_cast<std::size_t>(b) < n % blocks ? 1 : 0);
}

Moments run_block(const MonteCarlo& mc, const ModelState& s, const Functional& fn, int b) {
  std::seed_seq seq{static_cast<std::uint32_t>(mc.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(mc.seed >> 32), static_cast<std::uint32_t>(b)};
  std::mt19937_64 rng(seq);
  Moments acc;
  const std::size_t nb = block_size(mc.n, b);
  for (std::size_t i = 0; i < nb; ++i) {
    Observation o = mc.sampler(s, rng);
    acc.add(fn(o));
  }
  return acc;
}

Expectation monte_carlo_expect(const MonteCarlo& mc, const ModelState& s, const Functional& fn,
                               bool parallel) {
  if (mc.n == 0) throw DomainError("Monte Carlo engine needs n > 0");
  if (mc.n < 2) throw DomainError("Monte Carlo engine needs n >= 2 for a standard error");
  std::vector<Moments> blocks(kMonteCarloBlocks);
  std::vector<std::string> errors(kMonteCarloBlocks);
#pragma omp parallel for schedule(static) if (parallel)
  for (int b = 0; b < kMonteCarloBlocks; ++b) {
    try {
      blocks[static_cast<std::size_t>(b)] = run_block(mc, s, fn, b);
    } catch (const std::exception& ex) {
      errors[static_cast<std::size_t>(b)] = ex.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw EvaluationError(e);
  Moments total;
  for (const auto& b : blocks) total.merge(b);
  const double n = total.count;
  Vector var = total.m2 / (n - 1.0);
  return {total.mean, (var.array() / n).sqrt().matrix()};
}

Expectation exact_expect(const ExactEnumeration& e, const ModelState& s, const Functional& fn) {
  const Vector p = outcome_probabilities(e, s);
  Vector acc;
  for (std::size_t i = 0; i < e.outcomes.size(); ++i) {
    Vector v = fn(e.outcomes[i]);
    if (i == 0) acc = Vector::Zero(v.size());
    if (v.size() != acc.size()) throw DimensionError("functional returned vectors of varying length");
    acc += p[static_cast<Eigen::Index>(i)] * v;
  }
  return {acc, Vector::Zero(acc.size())};
}

Expectation expect_impl(const ExpectationEngine& e, const ModelState& s, const Functional& fn,
                        bool parallel) {
  if (const auto* ex = std::get_if<ExactEnumeration>(&e)) return exact_expect(*ex, s, fn);
  if (const auto* mc = std::get_if<MonteCarlo>(&e)) return monte_carlo_expect(*mc, s, fn, parallel);
  throw NotAvailable("closed-form engine cannot evaluate arbitrary expectations");
}

// Per-observation (unweighted) pieces of the structural functions.
struct Contribution {
  Matrix gc;                 // m x d, centered under L2Zero
  Matrix h;                  // gc * f_ddot
  std::vector<Matrix> g_dot; // raw, second argument of beta
  Matrix alpha;              // m x p
  Vector gamma;              // m
};

Contribution contribution(const ModelComponents& mc, const ModelState& s, const Observation& o) {
  ObservationTerms t = evaluate_terms(mc, s, o);
  const bool centered = mc.tangent == TangentKind::L2Zero;
  const auto m = t.g.rows();
  Contribution c;
  c.gc = t.g;
  if (centered) c.gc.rowwise() -= t.g_int.transpose();
  c.h = c.gc * t.f_ddot;
  c.alpha.resize(m, mc.p);
  for (int j = 0; j < mc.p; ++j) {
    Matrix gd = t.g_dot[static_cast<std::size_t>(j)];
    if (centered) gd.rowwise() -= t.g_dot_int.col(j).transpose();
    c.alpha.col(j) = -gd * t.f_dot;
  }
  c.gamma = -c.gc * t.f_dot;
  if (centered && !mc.L_is_zero) c.gamma.array() += mc.L(Vector::Ones(m), o);
  c.g_dot = std::move(t.g_dot);
  return c;
}

// Flattened layout used by the Monte Carlo path: alpha | beta_1..p | gamma | kappa.
Vector flatten(const Contribution& c, int p) {
  const auto m = c.gc.rows();
  Vector out(m * p + p * m * m + m + m * m);
  Eigen::Index k = 0;
  out.segment(k, m * p) = c.alpha.reshaped();
  k += m * p;
  for (int j = 0; j < p; ++j) {
    Matrix beta = -c.h * c.g_dot[static_cast<std::size_t>(j)].transpose();
    out.segment(k, m * m) = beta.reshaped();
    k += m * m;
  }
  out.segment(k, m) = c.gamma;
  k += m;
  Matrix kappa = -c.h * c.gc.transpose();
  out.segment(k, m * m) = kappa.reshaped();
  return out;
}

void unflatten(const Vector& v, Eigen::Index m, int p, Matrix& alpha, std::vector<Matrix>& beta,
               Vector& gamma, Matrix& kappa) {
  Eigen::Index k = 0;
  alpha = v.segment(k, m * p).reshaped(m, p);
  k += m * p;
  beta.assign(static_cast<std::size_t>(p), Matrix());
  for (int j = 0; j < p; ++j) {
    beta[static_cast<std::size_t>(j)] = v.segment(k, m * m).reshaped(m, m);
    k += m * m;
  }
  gamma = v.segment(k, m);
  k += m;
  kappa = v.segment(k, m * m).reshaped(m, m);
}

StructuralFunctions zero_se(StructuralFunctions sf) {
  sf.alpha_se = Matrix::Zero(sf.alpha.rows(), sf.alpha.cols());
  sf.beta_se.clear();
  for (const auto& b : sf.beta) sf.beta_se.push_back(Matrix::Zero(b.rows(), b.cols()));
  sf.gamma_se = Vector::Zero(sf.gamma.size());
  sf.kappa_se = Matrix::Zero(sf.kappa.rows(), sf.kappa.cols());
  return sf;
}

StructuralFunctions monte_carlo_structural(const MonteCarlo& e, const ModelComponents& mc,
                                           const ModelState& s, bool parallel) {
  const auto m = static_cast<Eigen::Index>(s.eta.size());
  Functional fn = [&](const Observation& o) { return flatten(contribution(mc, s, o), mc.p); };
  Expectation ex = monte_carlo_expect(e, s, fn, parallel);
  StructuralFunctions sf;
  unflatten(ex.value, m, mc.p, sf.alpha, sf.beta, sf.gamma, sf.kappa);
  unflatten(ex.se, m, mc.p, sf.alpha_se, sf.beta_se, sf.gamma_se, sf.kappa_se);
  return sf;
}

StructuralFunctions closed_form_structural(const ClosedForm& e, const ModelState& s) {
  if (!e.structural) throw NotAvailable("closed-form engine for " + e.model + " has no structural functions");
  StructuralFunctions sf = e.structural(s);
  return zero_se(std::move(sf));
}

StructuralFunctions exact_structural_parallel(const ExactEnumeration& e,
                                              const ModelComponents& mc, const ModelState& s) {
  const Vector prob = outcome_probabilities(e, s);
  const auto n = static_cast<long>(e.outcomes.size());
  const auto m = static_cast<Eigen::Index>(s.eta.size());
  std::vector<Contribution> parts(static_cast<std::size_t>(n));
  std::vector<std::string> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    try {
      parts[static_cast<std::size_t>(i)] = contribution(mc, s, e.outcomes[static_cast<std::size_t>(i)]);
    } catch (const std::exception& ex) {
      errors[static_cast<std::size_t>(i)] = ex.what();
    }
  }
  for (const auto& err : errors)
    if (!err.empty()) throw EvaluationError(err);

  // Stack weighted columns so every kernel row is one fixed-order product.
  Eigen::Index cols = 0;
  for (const auto& c : parts) cols += c.gc.cols();
  Matrix hs(m, cols), gs(m, cols);
  std::vector<Matrix> gds(static_cast<std::size_t>(mc.p), Matrix(m, cols));
  StructuralFunctions sf;
  sf.alpha = Matrix::Zero(m, mc.p);
  sf.gamma = Vector::Zero(m);
  Eigen::Index k = 0;
  for (long i = 0; i < n; ++i) {
    const auto& c = parts[static_cast<std::size_t>(i)];
    const double w = prob[i];
    const auto d = c.gc.cols();
    hs.middleCols(k, d) = -w * c.h;
    gs.middleCols(k, d) = c.gc;
    for (int j = 0; j < mc.p; ++j)
      gds[static_cast<std::size_t>(j)].middleCols(k, d) = c.g_dot[static_cast<std::size_t>(j)];
    sf.alpha += w * c.alpha;
    sf.gamma += w * c.gamma;
    k += d;
  }
  sf.kappa.resize(m, m);
  sf.beta.assign(static_cast<std::size_t>(mc.p), Matrix(m, m));
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < m; ++r) {
    sf.kappa.row(r).noalias() = hs.row(r) * gs.transpose();
    for (int j = 0; j < mc.p; ++j)
      sf.beta[static_cast<std::size_t>(j)].row(r).noalias() =
          hs.row(r) * gds[static_cast<std::size_t>(j)].transpose();
  }
  return zero_se(std::move(sf));
}

StructuralFunctions exact_structural_serial(const ExactEnumeration& e, const ModelComponents& mc,
                                            const ModelState& s) {
  const Vector prob = outcome_probabilities(e, s);
  const auto m = static_cast<Eigen::Index>(s.eta.size());
  StructuralFunctions sf;
  sf.alpha = Matrix::Zero(m, mc.p);
  sf.gamma = Vector::Zero(m);
  sf.kappa = Matrix::Zero(m, m);
  sf.beta.assign(static_cast<std::size_t>(mc.p), Matrix::Zero(m, m));
  for (std::size_t i = 0; i < e.outcomes.size(); ++i) {
    const Contribution c = contribution(mc, s, e.outcomes[i]);
    const double w = prob[static_cast<Eigen::Index>(i)];
    sf.alpha += w * c.alpha;
    sf.gamma += w * c.gamma;
    sf.kappa -= w * c.h * c.gc.transpose();
    for (int j = 0; j < mc.p; ++j)
      sf.beta[static_cast<std::size_t>(j)] -= w * c.h * c.g_dot[static_cast<std::size_t>(j)].transpose();
  }
  return zero_se(std::move(sf));
}

StructuralFunctions dispatch(const ExpectationEngine& e, const ModelComponents& mc,
                             const ModelState& s, bool parallel) {
  check_state(mc, s);
  if (const auto* ex = std::get_if<ExactEnumeration>(&e))
    return parallel ? exact_structural_parallel(*ex, mc, s) : exact_structural_serial(*ex, mc, s);
  if (const auto* m = std::get_if<MonteCarlo>(&e)) return monte_carlo_structural(*m, mc, s, parallel);
  return closed_form_structural(std::get<ClosedForm>(e), s);
}

double max_abs(const Eigen::Ref<const Matrix>& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

Expectation expect(const ExpectationEngine& e, const ModelState& s, const Functional& fn) {
  return expect_impl(e, s, fn, true);
}

double StructuralFunctions::max_se() const {
  double out = std::max({max_abs(alpha_se), max_abs(gamma_se), max_abs(kappa_se)});
  for (const auto& b : beta_se) out = std::max(out, max_abs(b));
  return out;
}

StructuralFunctions structural_functions(const ExpectationEngine& e, const ModelComponents& mc,
                                         const ModelState& s) {
  return dispatch(e, mc, s, true);
}

StructuralFunctions structural_functions_serial(const ExpectationEngine& e,
                                                const ModelComponents& mc, const ModelState& s) {
  return dispatch(e, mc, s, false);
}

std::vector<ProbeRow> mc_convergence_probe(const ExpectationEngine& e,
                                           const ModelComponents& mc, const ModelState& s,
                                           const std::vector<std::size_t>& n_ladder) {
  const auto* base = std::get_if<MonteCarlo>(&e);
  if (!base) throw DomainError("convergence probe requires a Monte Carlo engine");
  if (n_ladder.empty()) throw DomainError("convergence probe needs at least one sample size");
  std::vector<StructuralFunctions> runs;
  for (std::size_t n : n_ladder) {
    MonteCarlo m = *base;
    m.n = n;
    runs.push_back(structural_functions(ExpectationEngine{m}, mc, s));
  }
  const auto top = static_cast<std::size_t>(
      std::max_element(n_ladder.begin(), n_ladder.end()) - n_ladder.begin());
  const auto& ref = runs[top];
  std::vector<ProbeRow> out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    double dev = std::max({max_abs(r.alpha - ref.alpha), max_abs(r.gamma - ref.gamma),
                           max_abs(r.kappa - ref.kappa)});
    for (std::size_t j = 0; j < r.beta.size(); ++j)
      dev = std::max(dev, max_abs(r.beta[j] - ref.beta[j]));
    out.push_back({n_ladder[i], dev, r.max_se()});
  }
  return out;
}

}  // namespace semiinfo
