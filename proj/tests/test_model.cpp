#include "semiinfo/zoo.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace semiinfo;

namespace {

Observation find(const ZooModel& m, int delta, long index, double z, int count = -1) {
  for (const Observation& o : m.exact->outcomes)
    if (o.delta == delta && o.index == index && o.z[0] == z && (count < 0 || o.count == count)) return o;
  throw std::runtime_error("outcome not enumerated");
}

ModelState at_theta(const ZooModel& m, double theta) {
  ModelState s = m.state;
  s.theta.setZero();
  s.theta[0] = theta;
  return s;
}

}  // namespace

TEST(LogDensity, CurrentStatusEvent) {
  const ZooModel m = build_cox_cs({});
  for (double z : {0.0, 1.0}) {
    for (long j = 0; j < 3; ++j) {
      const double lambda = std::vector<double>{0.2, 0.5, 0.9}[static_cast<std::size_t>(j)];
      const Observation o = find(m, 1, j, z);
      EXPECT_NEAR(log_density(m.components, m.state, o), std::log(1.0 - std::exp(-lambda)), 1e-14);
    }
  }
}

TEST(LogDensity, RightCensoredNoEvent) {
  const ZooModel m = build_cox_rc({});
  const ModelState s = at_theta(m, 0.4);
  const Observation o = find(m, 0, 1, 1.0);
  EXPECT_NEAR(log_density(m.components, s, o), -std::exp(0.4) * 0.5, 1e-14);
}

TEST(LogDensity, MixtureIsLogSum) {
  const MixtureParams p;
  const ZooModel m = build_mixture(p);
  const auto support = static_cast<int>(p.masses.size());
  for (const Observation& o : m.exact->outcomes) {
    double sum = 0.0;
    for (int zi = 0; zi < support; ++zi) {
      const double q = (zi + 0.5) / support;
      sum += std::exp(std::lgamma(p.trials + 1.0) - std::lgamma(o.label + 1.0) -
                      std::lgamma(p.trials - o.label + 1.0)) *
             std::pow(q, o.label) * std::pow(1.0 - q, p.trials - o.label) * p.masses[static_cast<std::size_t>(zi)];
    }
    EXPECT_NEAR(log_density(m.components, m.state, o), std::log(sum), 1e-12);
  }
}

TEST(LogDensity, UndefinedArgumentNamesObservation) {
  const ZooModel m = build_cox_cs({});
  Observation o = find(m, 1, 0, 1.0);
  o.index = -1;  // empty integral: log(1 - exp(0))
  try {
    log_density(m.components, m.state, o);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find("delta=1"), std::string::npos) << e.what();
  }
}

TEST(ScoreTheta, CurrentStatusExample) {
  const ZooModel m = build_cox_cs({});
  const Observation o = find(m, 1, 1, 1.0);
  const double expected = 0.5 * std::exp(-0.5) / (1.0 - std::exp(-0.5));
  EXPECT_NEAR(score_theta(m.components, m.state, o)[0], expected, 1e-14);
  EXPECT_NEAR(expected, 0.77075, 5e-6);
}

TEST(ScoreTheta, RightCensoredFormula) {
  const ZooModel m = build_cox_rc({});
  const ModelState s = at_theta(m, -0.3);
  const Vector& w = s.eta.masses();
  for (const Observation& o : m.exact->outcomes) {
    const double z = o.z[0];
    double risk = 0.0;
    for (long i = 0; i <= o.index; ++i) risk += w[i];
    const double expected = o.delta * o.count * z - z * std::exp(-0.3 * z) * risk;
    EXPECT_NEAR(score_theta(m.components, s, o)[0], expected, 1e-14);
  }
}

TEST(ScoreTheta, ZeroWhenNothingDependsOnTheta) {
  const ZooModel km = build_kaplan_meier({});
  ASSERT_EQ(km.components.p, 0);
  EXPECT_EQ(score_theta(km.components, km.state, km.exact->outcomes.front()).size(), 0);
}

TEST(ScoreTheta, MatchesCentralDifferences) {
  for (ModelId id : {ModelId::CoxRC, ModelId::CoxCS, ModelId::MissingCov, ModelId::RecurrentTransform}) {
    const ZooModel m = oracle::default_model(id);
    const double h = 1e-5;
    for (const Observation& o : m.exact->outcomes) {
      const Vector sc = score_theta(m.components, m.state, o);
      for (Eigen::Index j = 0; j < sc.size(); ++j) {
        ModelState up = m.state, down = m.state;
        up.theta[j] += h;
        down.theta[j] -= h;
        const double fd = (log_density(m.components, up, o) - log_density(m.components, down, o)) / (2 * h);
        EXPECT_NEAR(sc[j], fd, 1e-6 * std::max(1.0, std::abs(fd))) << to_string(id) << " " << describe(o);
      }
    }
  }
}

TEST(ScoreOperator, RightCensoredUnitDirection) {
  const ZooModel m = build_cox_rc({});
  const ModelState s = at_theta(m, 0.7);
  const Observation o = find(m, 1, 1, 1.0, 1);
  const double ba = score_operator(m.components, s, o, Direction::unit(3, 0));
  EXPECT_NEAR(ba, -std::exp(0.7) * 0.2, 1e-14);
  EXPECT_EQ(score_operator(m.components, s, o, Direction::zeros(3)), 0.0);
}

TEST(ScoreOperator, RightCensoredFormula) {
  const ZooModel m = build_cox_rc({});
  const ModelState s = at_theta(m, 0.2);
  const Direction a{Vector{{0.3, -1.0, 2.0}}, false};
  const Vector& w = s.eta.masses();
  for (const Observation& o : m.exact->outcomes) {
    double integral = 0.0;
    for (long i = 0; i <= o.index; ++i) integral += a.values[i] * w[i];
    const double expected = o.delta * o.count * a.values[o.index] - std::exp(0.2 * o.z[0]) * integral;
    EXPECT_NEAR(score_operator(m.components, s, o, a), expected, 1e-14);
  }
}

TEST(ScoreOperator, MatchesOneSidedDifference) {
  const ZooModel m = build_cox_rc({});
  const Direction a{Vector{{0.5, -0.25, 1.0}}, false};
  const double h = 1e-6;
  const ModelState up{m.state.theta, perturb_measure(m.state.eta, a, h).measure};
  for (const Observation& o : m.exact->outcomes) {
    const double fd = (log_density(m.components, up, o) - log_density(m.components, m.state, o)) / h;
    // Truncation error is h |d2/dt2 log p| / 2, which grows with the tie count.
    EXPECT_NEAR(score_operator(m.components, m.state, o, a), fd, 1e-5 * std::max(1.0, std::abs(fd))) << describe(o);
  }
}

TEST(ScoreOperator, LinearInDirection) {
  const ZooModel m = build_missing_cov({});
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  const auto k = static_cast<Eigen::Index>(m.state.eta.size());
  for (int rep = 0; rep < 10; ++rep) {
    Direction a{Vector(k), false}, b{Vector(k), false};
    for (Eigen::Index i = 0; i < k; ++i) {
      a.values[i] = n01(rng);
      b.values[i] = n01(rng);
    }
    a = center(a, m.state.eta);
    b = center(b, m.state.eta);
    const double s = n01(rng), t = n01(rng);
    const Direction comb{s * a.values + t * b.values, true};
    for (const Observation& o : m.exact->outcomes) {
      const double lhs = score_operator(m.components, m.state, o, comb);
      const double rhs = s * score_operator(m.components, m.state, o, a) +
                         t * score_operator(m.components, m.state, o, b);
      EXPECT_NEAR(lhs, rhs, 1e-10);
    }
  }
}

TEST(ScoreOperator, NonCenteredRejectedUnderMeanZeroTangent) {
  const ZooModel m = build_mixture({});
  const auto k = m.state.eta.size();
  EXPECT_THROW(score_operator(m.components, m.state, m.exact->outcomes.front(), Direction::ones(k)),
               DomainError);
}

TEST(ModelState, KindMustMatchTangent) {
  const ZooModel mix = build_mixture({});
  const ModelState wrong{mix.state.theta,
                         DiscreteMeasure(mix.state.eta.grid(), mix.state.eta.masses(), MeasureKind::PositiveFinite)};
  EXPECT_THROW(check_state(mix.components, wrong), DomainError);
  const ZooModel rc = build_cox_rc({});
  EXPECT_THROW(check_state(rc.components, ModelState{Vector::Zero(2), rc.state.eta}), DimensionError);
}

TEST(Scores, MeanZeroUnderEnumeration) {
  for (ModelId id : all_models()) {
    const ZooModel m = oracle::default_model(id);
    const double total = oracle::expect(m, m.state, [](const Observation&) { return 1.0; });
    EXPECT_NEAR(total, 1.0, 1e-10) << to_string(id);
    for (Eigen::Index j = 0; j < m.components.p; ++j)
      EXPECT_NEAR(oracle::expect(m, m.state,
                                 [&](const Observation& o) { return score_theta(m.components, m.state, o)[j]; }),
                  0.0, 1e-9)
          << to_string(id);
    std::mt19937_64 rng(static_cast<std::uint64_t>(id) + 1);
    std::normal_distribution<double> n01;
    const auto k = static_cast<Eigen::Index>(m.state.eta.size());
    for (int rep = 0; rep < 20; ++rep) {
      Direction a{Vector(k), false};
      for (Eigen::Index i = 0; i < k; ++i) a.values[i] = n01(rng);
      if (m.components.tangent == TangentKind::L2Zero) a = center(a, m.state.eta);
      EXPECT_NEAR(oracle::expect(m, m.state,
                                 [&](const Observation& o) { return score_operator(m.components, m.state, o, a); }),
                  0.0, 1e-9)
          << to_string(id);
    }
  }
}
