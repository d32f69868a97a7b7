#include "semiinfo/validation.hpp"

#include "semiinfo/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace semiinfo {

PropertyResult make_result(std::string name, double discrepancy, double tolerance,
                           std::string context) {
  PropertyResult r;
  r.name = std::move(name);
  r.max_discrepancy = discrepancy;
  r.tolerance = tolerance;
  r.passed = discrepancy <= tolerance;  // NaN fails
  r.context = std::move(context);
  return r;
}

Direction random_direction(std::mt19937_64& rng, const DiscreteMeasure& eta, bool centered) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Direction d = Direction::zeros(eta.size());
  for (Eigen::Index i = 0; i < d.values.size(); ++i) d.values[i] = unif(rng);
  if (centered) d = center(d, eta);
  return d;
}

namespace {

bool is_l2zero(const ModelComponents& mc) { return mc.tangent == TangentKind::L2Zero; }

void require_admissible(const ModelComponents& mc, const ModelState& s, const Direction& b,
                        const char* what) {
  if (b.size() != s.eta.size()) throw DimensionError(std::string(what) + ": direction does not match grid");
  if (is_l2zero(mc) && !is_centered(b, s.eta))
    throw DomainError(std::string(what) + ": direction must be eta-centered under L2Zero");
}

ModelState moved(const ModelState& s, const Direction& b, double t) {
  return {s.theta, perturb_measure(s.eta, b, t).measure};
}

// Value of the chosen score at state s2 (a recentered at s2 under L2Zero).
double score_value(const ModelComponents& mc, const ModelState& s2, const ScoreChoice& which,
                   const Observation& o) {
  const ObservationTerms t = evaluate_terms(mc, s2, o);
  if (which.theta_component >= 0) return score_theta(t)[which.theta_component];
  Vector a = which.direction;
  if (is_l2zero(mc)) a.array() -= a.dot(s2.eta.masses()) / s2.eta.total_mass();
  return score_operator(mc, s2, o, t, a);
}

double expect_scalar(const ExpectationEngine& e, const ModelState& s,
                     const std::function<double(const Observation&)>& fn) {
  return expect(e, s, [&](const Observation& o) { return Vector::Constant(1, fn(o)); }).value[0];
}

struct FdOutcome {
  double normalized = 0.0;
  double err_h = 0.0;
  double err_h2 = 0.0;
  double order = 0.0;
  double tol = 0.0;
  bool vacuous = false;
};

// Central differences at h and h/2 against `exact` (with an additional
// reference value `other` checked at the same tolerance).
FdOutcome assess_fd(double d_h, double d_h2, double exact, double other, const FdOptions& fd) {
  FdOutcome out;
  const double scale = std::max(1.0, std::abs(exact));
  out.tol = fd.constant * scale * fd.h * fd.h;
  out.err_h = std::max(std::abs(d_h - exact), std::abs(d_h - other));
  out.err_h2 = std::abs(d_h2 - exact);
  out.vacuous = std::abs(d_h - exact) <= fd.vacuous * scale;
  out.order = out.err_h2 > 0.0 ? std::abs(d_h - exact) / out.err_h2 : std::numeric_limits<double>::infinity();
  double penalty = 0.0;
  if (!out.vacuous && !(out.order >= fd.order_lo && out.order <= fd.order_hi))
    penalty = 1.0 + std::min(std::abs(out.order - fd.order_lo), std::abs(out.order - fd.order_hi));
  out.normalized = std::max(out.err_h / out.tol, penalty);
  if (std::isnan(out.normalized)) out.normalized = std::numeric_limits<double>::infinity();
  return out;
}

void add_fd_details(PropertyResult& r, const FdOutcome& f) {
  r.details.emplace_back("fd_error_h", f.err_h);
  r.details.emplace_back("fd_error_h2", f.err_h2);
  r.details.emplace_back("fd_tolerance", f.tol);
  r.details.emplace_back("fd_order", f.order);
  r.details.emplace_back("order_check_vacuous", f.vacuous ? 1.0 : 0.0);
}

PropertyResult worst(std::string name, const std::vector<PropertyResult>& parts, std::string ctx) {
  PropertyResult best = make_result(std::move(name), 0.0, 1.0, std::move(ctx));
  double worst_val = -1.0;
  for (const auto& p : parts) {
    const double ratio = p.tolerance > 0.0 ? p.max_discrepancy / p.tolerance
                                           : (p.max_discrepancy > 0.0 ? INFINITY : 0.0);
    if (std::isnan(ratio) || ratio > worst_val) {
      worst_val = std::isnan(ratio) ? INFINITY : ratio;
      best.max_discrepancy = p.max_discrepancy;
      best.tolerance = p.tolerance;
      best.details = p.details;
    }
  }
  best.passed = best.max_discrepancy <= best.tolerance;
  best.details.emplace_back("checks", static_cast<double>(parts.size()));
  return best;
}

}  // namespace

PropertyResult check_adjoint_identity(const ExpectationEngine& e, const ModelComponents& mc,
                                      const ModelState& s, const StructuralFunctions& sf,
                                      const ScoreChoice& which, const Direction& b,
                                      const FdOptions& fd) {
  check_state(mc, s);
  require_admissible(mc, s, b, "check_adjoint_identity");
  if (which.theta_component >= mc.p) throw DimensionError("theta component out of range");
  if (which.theta_component < 0) {
    require_admissible(mc, s, Direction{which.direction, false}, "check_adjoint_identity (a)");
  }

  // <B* g, b>_eta
  double lhs = 0.0;
  if (which.theta_component >= 0) {
    const Matrix adj = adjoint_score(sf, s, mc.tangent);
    lhs = inner_product(Direction{adj.col(which.theta_component), false}, b, s.eta);
  } else {
    const KernelOperator op = info_operator(sf, s, mc.tangent);
    lhs = inner_product(apply(op, Direction{which.direction, false}), b, s.eta);
  }
  // E[g B b]
  const double rhs = expect_scalar(e, s, [&](const Observation& o) {
    const ObservationTerms t = evaluate_terms(mc, s, o);
    return score_value(mc, s, which, o) * score_operator(mc, s, o, t, b.values);
  });
  // -E[d/dt g(eta_t)] by central differences at h and h / 2.
  auto derivative = [&](double h) {
    const ModelState up = moved(s, b, h), down = moved(s, b, -h);
    const double v = expect_scalar(e, s, [&](const Observation& o) {
      return score_value(mc, up, which, o) - score_value(mc, down, which, o);
    });
    return -v / (2.0 * h);
  };
  const double d_h = derivative(fd.h);
  const double d_h2 = derivative(fd.h / 2.0);

  const FdOutcome f = assess_fd(d_h, d_h2, rhs, lhs, fd);
  const double exact_pair = std::abs(lhs - rhs);
  PropertyResult r = make_result("adjoint_identity", std::max(exact_pair / fd.exact_tol, f.normalized), 1.0);
  r.details.emplace_back("inner_product", lhs);
  r.details.emplace_back("expectation", rhs);
  r.details.emplace_back("derivative", d_h);
  r.details.emplace_back("exact_pair", exact_pair);
  add_fd_details(r, f);
  return r;
}

PropertyResult check_score_fd(const ModelComponents& mc, const ModelState& s, const Observation& o,
                              const Direction& a, const FdOptions& fd) {
  check_state(mc, s);
  require_admissible(mc, s, a, "check_score_fd");
  const double sup = a.values.size() ? a.values.cwiseAbs().maxCoeff() : 0.0;
  if (!(std::abs(fd.h) * sup < 1.0)) throw DomainError("check_score_fd: |h| max|a| must be < 1");
  const double exact = score_operator(mc, s, o, a);
  auto derivative = [&](double h) {
    return (log_density(mc, moved(s, a, h), o) - log_density(mc, moved(s, a, -h), o)) / (2.0 * h);
  };
  const double d_h = derivative(fd.h);
  const double d_h2 = derivative(fd.h / 2.0);
  const FdOutcome f = assess_fd(d_h, d_h2, exact, exact, fd);
  PropertyResult r = make_result("score_fd", f.normalized, 1.0, describe(o));
  r.details.emplace_back("score_operator", exact);
  r.details.emplace_back("derivative", d_h);
  add_fd_details(r, f);
  return r;
}

PropertyResult check_centering_construction(const ExpectationEngine& e, const ModelComponents& mc,
                                            const ModelState& s, const Direction& a, double t,
                                            std::uint64_t seed, int n_b, const FdOptions& fd) {
  if (!is_l2zero(mc)) throw DomainError("centering construction applies to L2Zero models only");
  check_state(mc, s);
  require_admissible(mc, s, a, "check_centering_construction");
  const ModelState st = moved(s, a, t);
  const Direction at = center(a, st.eta);
  const StructuralFunctions sf = structural_functions(e, mc, st);
  std::mt19937_64 rng(seed);
  std::vector<PropertyResult> parts;
  for (int k = 0; k < n_b; ++k) {
    const Direction b = random_direction(rng, st.eta, true);
    parts.push_back(check_adjoint_identity(e, mc, st, sf, ScoreChoice::operator_in(at.values), b, fd));
  }
  PropertyResult r = worst("centering_construction", parts, "t=" + format_number(t));
  return r;
}

// ---------------------------------------------------------------------------

namespace {

double max_abs(const Eigen::Ref<const Matrix>& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double max_diff(const StructuralFunctions& a, const StructuralFunctions& b) {
  double d = std::max({max_abs(a.alpha - b.alpha), max_abs(a.gamma - b.gamma), max_abs(a.kappa - b.kappa)});
  for (std::size_t j = 0; j < a.beta.size(); ++j) d = std::max(d, max_abs(a.beta[j] - b.beta[j]));
  return d;
}

double scale_of(const StructuralFunctions& a) {
  double d = std::max({max_abs(a.alpha), max_abs(a.gamma), max_abs(a.kappa)});
  for (const auto& b : a.beta) d = std::max(d, max_abs(b));
  return std::max(1.0, d);
}

std::string state_label(const ZooModel& m, const ModelState& s) {
  std::string out = std::string("model=") + to_string(m.id) + " theta=[";
  for (Eigen::Index i = 0; i < s.theta.size(); ++i) {
    if (i) out += ',';
    out += format_number(s.theta[i]);
  }
  return out + "]";
}

// Fraction of entries within sigma standard errors.
void coverage(const Eigen::Ref<const Matrix>& mc, const Eigen::Ref<const Matrix>& se,
              const Eigen::Ref<const Matrix>& ref, double sigma, std::size_t& inside, std::size_t& total) {
  for (Eigen::Index i = 0; i < mc.size(); ++i) {
    const double diff = std::abs(mc.data()[i] - ref.data()[i]);
    if (diff <= sigma * se.data()[i] + 1e-12) ++inside;
    ++total;
  }
}

class SuiteRunner {
 public:
  SuiteRunner(const SuiteCase& c, const ModelState& s, std::size_t state_index,
              const std::vector<std::uint64_t>& seeds, const SuiteConfig& cfg, std::vector<PropertyResult>& out)
      : model_(c.model), mc_(c.model.components), s_(s), seeds_(seeds), cfg_(cfg), out_(out),
        ctx_(state_label(c.model, s)),
        rng_(0x5eed0000ULL + 7919ULL * static_cast<std::uint64_t>(c.model.id) + state_index) {}

  void run() {
    if (!model_.exact) {
      add(make_result("exact_engine", INFINITY, 0.0));
      return;
    }
    engine_ = *model_.exact;
    guard("normalization", [&] { return normalization(); });
    guard("mean_zero_scores", [&] { return mean_zero(); });
    guard("L_linearity", [&] { return l_linearity(); });
    guard("score_operator_linearity", [&] { return score_linearity(); });
    guard("f_derivatives_fd", [&] { return f_derivatives(); });
    if (mc_.p > 0) guard("score_theta_fd", [&] { return score_theta_fd(); });
    guard("score_operator_fd", [&] { return score_operator_fd(); });

    bool have_sf = false;
    guard("structural_serial_parallel", [&] {
      sf_ = structural_functions(engine_, mc_, s_);
      const StructuralFunctions serial = structural_functions_serial(engine_, mc_, s_);
      if (cfg_.mutate_kappa) mutate(sf_);
      have_sf = true;
      const StructuralFunctions clean = structural_functions(engine_, mc_, s_);
      return make_result("", max_diff(clean, serial), 1e-12 * scale_of(serial));
    });
    if (!have_sf) return;
    guard("kappa_symmetry", [&] { return make_result("", max_abs(sf_.kappa - sf_.kappa.transpose()), 1e-10); });
    references();
    if (mc_.L_is_zero)
      guard("gamma_zero_when_L_zero", [&] { return make_result("", max_abs(sf_.gamma), 1e-10); });
    for (int j = 0; j < mc_.p; ++j)
      guard("adjoint_theta_" + std::to_string(j), [&] { return adjoint_theta(j); });
    guard("adjoint_operator", [&] { return adjoint_operator(); });
    guard("operator_symmetry", [&] { return operator_symmetry(); });
    guard("category", [&] {
      const Category got = classify_category(sf_.gamma, category_tolerance(sf_, engine_, cfg_.info), cfg_.info.bound_M);
      PropertyResult r = make_result("", got == model_.expected_category ? 0.0 : 1.0, 0.0);
      r.details.emplace_back("gamma_min", sf_.gamma.minCoeff());
      r.details.emplace_back("gamma_max", sf_.gamma.maxCoeff());
      return r;
    });
    info_checks();
    guard("local_identifiability", [&] {
      const double ev = check_local_identifiability(engine_, mc_, s_);
      const bool identified = ev > 1e-10;
      PropertyResult r = make_result("", identified == model_.expected_identifiable ? 0.0 : 1.0, 0.0);
      r.details.emplace_back("min_eigenvalue", ev);
      r.details.emplace_back("expected_identifiable", model_.expected_identifiable ? 1.0 : 0.0);
      return r;
    });
    if (is_l2zero(mc_))
      guard("centering_construction", [&] {
        const Direction a = random_direction(rng_, s_.eta, true);
        return check_centering_construction(engine_, mc_, s_, a, 0.1, rng_(), 10, cfg_.fd);
      });
    if (cfg_.mc_n > 0 && model_.sampler && !seeds_.empty())
      guard("monte_carlo_coverage", [&] { return monte_carlo(); });
  }

 private:
  template <class F>
  void guard(const std::string& name, F&& fn) {
    PropertyResult r;
    try {
      r = fn();
    } catch (const std::exception& ex) {
      r = make_result(name, INFINITY, 0.0);
      r.context = std::string("error: ") + ex.what();
    }
    r.name = std::string(to_string(model_.id)) + "/" + name;
    r.context = r.context.empty() ? ctx_ : ctx_ + "; " + r.context;
    add(std::move(r));
  }

  void add(PropertyResult r) { out_.push_back(std::move(r)); }

  static void mutate(StructuralFunctions& sf) {
    for (Eigen::Index i = 0; i < sf.kappa.rows(); ++i)
      for (Eigen::Index j = i + 1; j < sf.kappa.cols(); ++j) sf.kappa(i, j) = -sf.kappa(i, j);
  }

  std::vector<Observation> sample_outcomes(std::size_t limit) const {
    const auto& all = model_.exact->outcomes;
    std::vector<Observation> out;
    const std::size_t stride = std::max<std::size_t>(1, all.size() / limit);
    for (std::size_t i = 0; i < all.size() && out.size() < limit; i += stride) out.push_back(all[i]);
    return out;
  }

  Direction direction() { return random_direction(rng_, s_.eta, is_l2zero(mc_)); }

  PropertyResult normalization() {
    double total = 0.0;
    for (const auto& o : model_.exact->outcomes) total += model_.exact->probability(s_, o);
    return make_result("", std::abs(total - 1.0), 1e-10);
  }

  PropertyResult mean_zero() {
    double worst = 0.0;
    if (mc_.p > 0) {
      const Vector m = expect(engine_, s_, [&](const Observation& o) { return score_theta(mc_, s_, o); }).value;
      worst = m.cwiseAbs().maxCoeff();
    }
    for (int k = 0; k < cfg_.n_directions; ++k) {
      const Direction a = direction();
      const double v = expect_scalar(engine_, s_, [&](const Observation& o) { return score_operator(mc_, s_, o, a); });
      worst = std::max(worst, std::abs(v));
    }
    return make_result("", worst, 1e-9);
  }

  PropertyResult l_linearity() {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
    for (const auto& o : sample_outcomes(50)) {
      const Vector a = direction().values, b = direction().values;
      const double x = unif(rng_), y = unif(rng_);
      const double lhs = mc_.L(x * a + y * b, o);
      worst = std::max(worst, std::abs(lhs - x * mc_.L(a, o) - y * mc_.L(b, o)));
    }
    return make_result("", worst, 1e-10);
  }

  PropertyResult score_linearity() {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
    for (const auto& o : sample_outcomes(50)) {
      const Direction a = direction(), b = direction();
      const double x = unif(rng_), y = unif(rng_);
      const Direction c{x * a.values + y * b.values, a.centered};
      const double lhs = score_operator(mc_, s_, o, c);
      worst = std::max(worst, std::abs(lhs - x * score_operator(mc_, s_, o, a) - y * score_operator(mc_, s_, o, b)));
    }
    return make_result("", worst, 1e-10);
  }

  PropertyResult f_derivatives() {
    const double h = 1e-5;
    double worst = 0.0;
    for (const auto& o : sample_outcomes(50)) {
      const ObservationTerms t = evaluate_terms(mc_, s_, o);
      const Vector& x = t.g_int;
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        Vector up = x, down = x;
        up[k] += h;
        down[k] -= h;
        const double fd1 = (mc_.f(up, o) - mc_.f(down, o)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd1 - t.f_dot[k]) / std::max(1.0, std::abs(t.f_dot[k])));
        const Vector fd2 = (mc_.f_dot(up, o) - mc_.f_dot(down, o)) / (2.0 * h);
        for (Eigen::Index r = 0; r < x.size(); ++r)
          worst = std::max(worst, std::abs(fd2[r] - t.f_ddot(r, k)) / std::max(1.0, std::abs(t.f_ddot(r, k))));
      }
    }
    return make_result("", worst, 1e-6);
  }

  PropertyResult score_theta_fd() {
    const double h = 1e-5;
    double worst = 0.0;
    for (const auto& o : sample_outcomes(50)) {
      const Vector sc = score_theta(mc_, s_, o);
      for (int j = 0; j < mc_.p; ++j) {
        ModelState up = s_, down = s_;
        up.theta[j] += h;
        down.theta[j] -= h;
        const double fd = (log_density(mc_, up, o) - log_density(mc_, down, o)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - sc[j]) / std::max(1.0, std::abs(sc[j])));
      }
    }
    return make_result("", worst, 1e-6);
  }

  PropertyResult score_operator_fd() {
    std::vector<PropertyResult> parts;
    for (const auto& o : sample_outcomes(20)) parts.push_back(check_score_fd(mc_, s_, o, direction(), cfg_.fd));
    return worst("", parts, "");
  }

  void references() {
    const double tol = 1e-9;
    if (model_.refs.gamma)
      guard("reference_gamma", [&] { return make_result("", max_abs(sf_.gamma - reference_gamma(model_, s_)), tol); });
    if (model_.refs.kappa)
      guard("reference_kappa", [&] { return make_result("", max_abs(sf_.kappa - reference_kappa(model_, s_)), tol); });
    if (model_.refs.alpha && mc_.p > 0)
      guard("reference_alpha", [&] { return make_result("", max_abs(sf_.alpha - reference_alpha(model_, s_)), tol); });
    if (model_.refs.beta && mc_.p > 0)
      guard("reference_beta", [&] {
        const auto ref = reference_beta(model_, s_);
        double d = 0.0;
        for (std::size_t j = 0; j < ref.size(); ++j) d = std::max(d, max_abs(sf_.beta[j] - ref[j]));
        return make_result("", d, tol);
      });
    if (mc_.p > 0 && (model_.refs.adjoint || (model_.refs.alpha && model_.refs.beta)))
      guard("reference_adjoint", [&] {
        return make_result("", max_abs(adjoint_score(sf_, s_, mc_.tangent) - reference_adjoint(model_, s_)), tol);
      });
  }

  PropertyResult adjoint_theta(int j) {
    std::vector<PropertyResult> parts;
    for (int k = 0; k < cfg_.n_directions; ++k)
      parts.push_back(check_adjoint_identity(engine_, mc_, s_, sf_, ScoreChoice::theta(j), direction(), cfg_.fd));
    return worst("", parts, "");
  }

  PropertyResult adjoint_operator() {
    std::vector<PropertyResult> parts;
    for (int i = 0; i < cfg_.n_operator_directions; ++i) {
      const Direction a = direction();
      for (int k = 0; k < cfg_.n_directions; ++k)
        parts.push_back(
            check_adjoint_identity(engine_, mc_, s_, sf_, ScoreChoice::operator_in(a.values), direction(), cfg_.fd));
    }
    return worst("", parts, "");
  }

  PropertyResult operator_symmetry() {
    const KernelOperator op = info_operator(sf_, s_, mc_.tangent);
    double worst_v = 0.0;
    for (int k = 0; k < cfg_.n_directions; ++k) {
      const Direction a = direction(), b = direction();
      const double ab = inner_product(apply(op, a), b, s_.eta);
      const double ba = inner_product(apply(op, b), a, s_.eta);
      const double ebb = expect_scalar(engine_, s_, [&](const Observation& o) {
        const ObservationTerms t = evaluate_terms(mc_, s_, o);
        return score_operator(mc_, s_, o, t, a.values) * score_operator(mc_, s_, o, t, b.values);
      });
      worst_v = std::max({worst_v, std::abs(ab - ba), std::abs(ab - ebb)});
    }
    return make_result("", worst_v, 1e-9);
  }

  void info_checks() {
    std::optional<InfoReport> result;
    guard("lfd_solve", [&] {
      PropertyResult r = make_result("", 0.0, 0.0);
      try {
        result.emplace(analyze(engine_, mc_, s_, cfg_.info));
        r.details.emplace_back("regularized", result->diagnostics.regularized ? 1.0 : 0.0);
        r.details.emplace_back("ridge", result->diagnostics.ridge);
      } catch (const IllPosed& ex) {
        // Expected for first-kind (Cat2) equations solved without a ladder.
        const bool expected = model_.expected_category == Category::Cat2;
        r = make_result("", expected ? 0.0 : 1.0, 0.0);
        r.context = std::string("IllPosed: ") + ex.what();
        r.details.emplace_back("condition", ex.condition_estimate);
      }
      return r;
    });
    if (mc_.p == 0)
      guard("influence_solve", [&] {
        PropertyResult r = make_result("", 0.0, 0.0);
        const Direction chi = direction();
        try {
          const InfluenceResult inf = nonparametric_efficient_influence(engine_, mc_, s_.eta, chi, cfg_.info);
          r.details.emplace_back("relative_residual", inf.relative_residual);
          r.details.emplace_back("regular", inf.regular ? 1.0 : 0.0);
        } catch (const IllPosed& ex) {
          r = make_result("", model_.expected_category == Category::Cat2 ? 0.0 : 1.0, 0.0);
          r.context = std::string("IllPosed: ") + ex.what();
          r.details.emplace_back("condition", ex.condition_estimate);
        }
        return r;
      });
    if (!result || mc_.p == 0) return;
    const InfoReport& rep = *result;
    if (!rep.diagnostics.regularized)
      guard("efficient_info_routes", [&] { return make_result("", max_abs(rep.eff_info - rep.eff_info_cross), 1e-8); });
    guard("efficient_info_psd", [&] {
      PropertyResult r = make_result(
          "", std::max(max_abs(rep.eff_info - rep.eff_info.transpose()), std::max(0.0, -rep.min_eig_eff)), 1e-9);
      r.details.emplace_back("min_eigenvalue", rep.min_eig_eff);
      return r;
    });
    guard("information_ordering", [&] {
      return make_result("", std::max(0.0, -min_eigen_sym(rep.fisher_theta - rep.eff_info)), 1e-9);
    });
    if (!rep.diagnostics.regularized)
      guard("projection_orthogonality", [&] {
        double w = 0.0;
        for (int k = 0; k < cfg_.n_directions; ++k) {
          const Direction a = direction();
          const Vector v = expect(engine_, s_, [&](const Observation& o) {
                             return Vector(efficient_score(mc_, s_, rep.lfd, o) * score_operator(mc_, s_, o, a));
                           }).value;
          w = std::max(w, v.cwiseAbs().maxCoeff());
        }
        return make_result("", w, 1e-8);
      });
  }

  PropertyResult monte_carlo() {
    const StructuralFunctions exact = structural_functions(engine_, mc_, s_);
    std::size_t inside = 0, total = 0;
    for (std::uint64_t seed : seeds_) {
      const StructuralFunctions m = structural_functions(make_engine(model_, EngineKind::MonteCarlo, cfg_.mc_n, seed), mc_, s_);
      coverage(m.alpha, m.alpha_se, exact.alpha, cfg_.mc_sigma, inside, total);
      coverage(m.gamma, m.gamma_se, exact.gamma, cfg_.mc_sigma, inside, total);
      coverage(m.kappa, m.kappa_se, exact.kappa, cfg_.mc_sigma, inside, total);
      for (std::size_t j = 0; j < m.beta.size(); ++j)
        coverage(m.beta[j], m.beta_se[j], exact.beta[j], cfg_.mc_sigma, inside, total);
    }
    const double frac = total ? static_cast<double>(inside) / static_cast<double>(total) : 1.0;
    PropertyResult r = make_result("", 1.0 - frac, 1.0 - cfg_.mc_coverage + 1e-15);
    r.details.emplace_back("coverage", frac);
    r.details.emplace_back("entries", static_cast<double>(total));
    return r;
  }

  const ZooModel& model_;
  const ModelComponents& mc_;
  ModelState s_;
  const std::vector<std::uint64_t>& seeds_;
  const SuiteConfig& cfg_;
  std::vector<PropertyResult>& out_;
  std::string ctx_;
  std::mt19937_64 rng_;
  ExpectationEngine engine_;
  StructuralFunctions sf_;
};

}  // namespace

std::vector<PropertyResult> run_suite(const std::vector<SuiteCase>& cases,
                                      const std::vector<std::uint64_t>& seeds, const SuiteConfig& config) {
  std::vector<PropertyResult> out;
  for (const auto& c : cases)
    for (std::size_t i = 0; i < c.states.size(); ++i) SuiteRunner(c, c.states[i], i, seeds, config, out).run();
  return out;
}

}  // namespace semiinfo
