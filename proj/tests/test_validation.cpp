#include "semiinfo/validation.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace semiinfo;

namespace {

double detail(const PropertyResult& r, const std::string& key) {
  for (const auto& [k, v] : r.details)
    if (k == key) return v;
  ADD_FAILURE() << "missing detail " << key;
  return NAN;
}

}  // namespace

TEST(AdjointIdentity, ZeroDirectionGivesZeroTerms) {
  const ZooModel m = build_cox_cs({});
  const ExpectationEngine e = make_engine(m, EngineKind::Exact);
  const StructuralFunctions sf = structural_functions(e, m.components, m.state);
  const PropertyResult r =
      check_adjoint_identity(e, m.components, m.state, sf, ScoreChoice::theta(0), Direction::zeros(3));
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(detail(r, "inner_product"), 0.0);
  EXPECT_EQ(detail(r, "expectation"), 0.0);
  EXPECT_EQ(detail(r, "derivative"), 0.0);
}

TEST(AdjointIdentity, CurrentStatusRandomDirections) {
  const ZooModel m = build_cox_cs({});
  const ExpectationEngine e = make_engine(m, EngineKind::Exact);
  const StructuralFunctions sf = structural_functions(e, m.components, m.state);
  std::mt19937_64 rng(12);
  for (int k = 0; k < 10; ++k) {
    const Direction b = random_direction(rng, m.state.eta, false);
    const PropertyResult r = check_adjoint_identity(e, m.components, m.state, sf, ScoreChoice::theta(0), b);
    EXPECT_TRUE(r.passed) << r.max_discrepancy;
    EXPECT_LE(detail(r, "exact_pair"), 1e-10);
    const double order = detail(r, "fd_order");
    if (detail(r, "order_check_vacuous") == 0.0) {
      EXPECT_GE(order, 3.5);
      EXPECT_LE(order, 4.5);
    }
  }
}

TEST(AdjointIdentity, NonCenteredDirectionRejectedUnderMeanZeroTangent) {
  const ZooModel m = build_mixture({});
  const ExpectationEngine e = make_engine(m, EngineKind::Exact);
  const StructuralFunctions sf = structural_functions(e, m.components, m.state);
  const auto k = m.state.eta.size();
  EXPECT_THROW(check_adjoint_identity(e, m.components, m.state, sf,
                                      ScoreChoice::operator_in(center(Direction::unit(k, 0), m.state.eta).values),
                                      Direction::ones(k)),
               DomainError);
}

TEST(ScoreFd, ZeroDirection) {
  const ZooModel m = build_cox_rc({});
  const PropertyResult r = check_score_fd(m.components, m.state, m.exact->outcomes[0], Direction::zeros(3));
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(detail(r, "score_operator"), 0.0);
  EXPECT_EQ(detail(r, "derivative"), 0.0);
}

TEST(ScoreFd, RightCensoredUnitDirection) {
  CoxRCParams p;
  p.theta = 0.25;
  const ZooModel m = build_cox_rc(p);
  const Observation* obs = nullptr;
  for (const Observation& o : m.exact->outcomes)
    if (o.delta == 1 && o.count == 1 && o.index == 1 && o.z[0] == 1.0) obs = &o;
  ASSERT_NE(obs, nullptr);
  FdOptions fd;
  fd.h = 1e-4;
  const PropertyResult r = check_score_fd(m.components, m.state, *obs, Direction::unit(3, 0), fd);
  EXPECT_NEAR(detail(r, "score_operator"), -std::exp(0.25) * 0.2, 1e-14);
  EXPECT_NEAR(detail(r, "derivative"), -std::exp(0.25) * 0.2, 1e-6);
  EXPECT_TRUE(r.passed);
}

TEST(ScoreFd, HalvingStepQuartersError) {
  const ZooModel m = build_cox_rc({});
  const Direction a{Vector{{0.8, -0.6, 0.9}}, false};
  std::size_t measured = 0;
  for (const Observation& o : m.exact->outcomes) {
    if (o.delta == 0 || o.count < 2) continue;
    const PropertyResult r = check_score_fd(m.components, m.state, o, a);
    EXPECT_TRUE(r.passed) << describe(o);
    if (detail(r, "order_check_vacuous") == 0.0) {
      ++measured;
      EXPECT_NEAR(detail(r, "fd_order"), 4.0, 0.5) << describe(o);
    }
  }
  EXPECT_GT(measured, 0u);
}

TEST(CenteringConstruction, ZeroStepIsPlainAdjointCheck) {
  const ZooModel m = build_mixture({});
  const ExpectationEngine e = make_engine(m, EngineKind::Exact);
  std::mt19937_64 rng(4);
  const Direction a = random_direction(rng, m.state.eta, true);
  const PropertyResult c = check_centering_construction(e, m.components, m.state, a, 0.0, 7, 6);

  const StructuralFunctions sf = structural_functions(e, m.components, m.state);
  std::mt19937_64 brng(7);
  double worst = -1.0, disc = 0.0;
  for (int k = 0; k < 6; ++k) {
    const Direction b = random_direction(brng, m.state.eta, true);
    const PropertyResult r =
        check_adjoint_identity(e, m.components, m.state, sf, ScoreChoice::operator_in(a.values), b);
    if (r.max_discrepancy / r.tolerance > worst) {
      worst = r.max_discrepancy / r.tolerance;
      disc = r.max_discrepancy;
    }
  }
  EXPECT_EQ(c.max_discrepancy, disc);
  EXPECT_TRUE(c.passed);
}

TEST(CenteringConstruction, MixtureAfterPerturbation) {
  const ZooModel m = build_mixture({});
  const ExpectationEngine e = make_engine(m, EngineKind::Exact);
  std::mt19937_64 rng(5);
  const Direction a = random_direction(rng, m.state.eta, true);
  const PropertyResult r = check_centering_construction(e, m.components, m.state, a, 0.2);
  EXPECT_TRUE(r.passed) << r.max_discrepancy;
}

TEST(CenteringConstruction, RejectsPositiveFiniteModel) {
  const ZooModel m = build_cox_rc({});
  EXPECT_THROW(check_centering_construction(make_engine(m, EngineKind::Exact), m.components, m.state,
                                            Direction::zeros(3), 0.1),
               DomainError);
}

TEST(RandomDirection, RangeAndCentering) {
  const ZooModel m = build_mixture({});
  std::mt19937_64 rng(6);
  const Direction raw = random_direction(rng, m.state.eta, false);
  EXPECT_LE(raw.values.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_TRUE(is_centered(random_direction(rng, m.state.eta, true), m.state.eta));
}

TEST(Suite, ToyModelsPassAtTwoThetas) {
  std::vector<SuiteCase> cases;
  for (ModelId id : {ModelId::CoxRC, ModelId::CoxCS}) {
    SuiteCase c{oracle::default_model(id), {}};
    for (double theta : {0.0, std::log(2.0)}) {
      ModelState s = c.model.state;
      s.theta[0] = theta;
      c.states.push_back(s);
    }
    cases.push_back(std::move(c));
  }
  const auto results = run_suite(cases, {1, 2});
  EXPECT_GT(results.size(), 20u);
  for (const PropertyResult& r : results) EXPECT_TRUE(r.passed) << r.name << " " << r.context;
}

TEST(Suite, ExactEnginesIgnoreSeeds) {
  const std::vector<SuiteCase> cases{{build_mixture({}), {build_mixture({}).state}}};
  const auto a = run_suite(cases, {1, 2, 3});
  const auto b = run_suite(cases, {1000});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].max_discrepancy, b[i].max_discrepancy) << a[i].name;
    EXPECT_EQ(a[i].passed, b[i].passed);
  }
}

TEST(Suite, KappaMutationIsCaught) {
  const ZooModel m = build_mixture({});
  SuiteConfig cfg;
  cfg.mutate_kappa = true;
  const auto results = run_suite({{m, {m.state}}}, {1}, cfg);
  bool symmetry_failed = false, adjoint_failed = false;
  for (const PropertyResult& r : results) {
    if (r.name.ends_with("/kappa_symmetry") && !r.passed) symmetry_failed = true;
    if (r.name.ends_with("/adjoint_operator") && !r.passed) adjoint_failed = true;
  }
  EXPECT_TRUE(symmetry_failed);
  EXPECT_TRUE(adjoint_failed);
}

TEST(Suite, MonteCarloCoverageIsReproducible) {
  const ZooModel m = build_missing_cov({});
  SuiteConfig cfg;
  cfg.mc_n = 2000;
  const auto a = run_suite({{m, {m.state}}}, {4, 5}, cfg);
  const auto b = run_suite({{m, {m.state}}}, {4, 5}, cfg);
  ASSERT_EQ(a.size(), b.size());
  bool saw_mc = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].max_discrepancy, b[i].max_discrepancy);
    if (a[i].name.ends_with("/monte_carlo_coverage")) saw_mc = true;
  }
  EXPECT_TRUE(saw_mc);
}
