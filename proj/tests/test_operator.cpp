#include "semiinfo/kernel_operator.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace semiinfo;

namespace {

DiscreteMeasure uniform_prob(Eigen::Index m) {
  return DiscreteMeasure(Grid::uniform(static_cast<std::size_t>(m), 1.0),
                         Vector::Constant(m, 1.0 / static_cast<double>(m)), MeasureKind::Probability);
}

}  // namespace

TEST(KernelOperator, ApplyExample) {
  const KernelOperator op{uniform_prob(2), Vector::Ones(2), Matrix::Ones(2, 2), false};
  const Direction out = apply(op, Direction{Vector{{2.0, 0.0}}, false});
  EXPECT_NEAR(out.values[0], 3.0, 1e-15);
  EXPECT_NEAR(out.values[1], 1.0, 1e-15);
}

TEST(KernelOperator, ApplyZeroGivesZero) {
  const KernelOperator op{uniform_prob(4), Vector::Ones(4), Matrix::Ones(4, 4), false};
  EXPECT_EQ(apply(op, Direction::zeros(4)).values, Vector::Zero(4));
}

TEST(KernelOperator, MatrixMatchesApply) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  const Eigen::Index m = 6;
  Vector gamma(m);
  Matrix kappa(m, m);
  for (Eigen::Index i = 0; i < m; ++i) gamma[i] = 1.0 + std::abs(n01(rng));
  for (Eigen::Index i = 0; i < kappa.size(); ++i) kappa.data()[i] = n01(rng);
  for (bool centering : {false, true}) {
    const KernelOperator op{uniform_prob(m), gamma, kappa, centering};
    const Matrix mat = as_matrix(op);
    for (int k = 0; k < 5; ++k) {
      Direction a{Vector(m), false};
      for (Eigen::Index i = 0; i < m; ++i) a.values[i] = n01(rng);
      EXPECT_LT((mat * a.values - apply(op, a).values).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

TEST(KernelOperator, RankOneKernelMatrix) {
  const Eigen::Index m = 5;
  const KernelOperator op{uniform_prob(m), Vector::Zero(m), Matrix::Ones(m, m), false};
  EXPECT_LT((as_matrix(op) - Matrix::Constant(m, m, 0.2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(KernelOperator, CenteringMatrix) {
  const DiscreteMeasure eta(Grid({1.0, 2.0, 3.0}, 3.0), Vector{{0.5, 0.25, 0.25}}, MeasureKind::Probability);
  const KernelOperator op{eta, Vector::Ones(3), Matrix::Zero(3, 3), true};
  const Matrix expected = Matrix::Identity(3, 3) - Vector::Ones(3) * eta.masses().transpose();
  EXPECT_LT((as_matrix(op) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Solve, IdentityReturnsRhs) {
  const KernelOperator op{uniform_prob(4), Vector::Ones(4), Matrix::Zero(4, 4), false};
  const Direction rhs{Vector{{1.0, -2.0, 0.5, 3.0}}, false};
  const SolveResult r = solve(op, rhs, 0.0);
  EXPECT_LT((r.solution.values - rhs.values).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(r.residual_norm, 1e-14);
  EXPECT_NEAR(r.condition, 1.0, 1e-12);
  EXPECT_FALSE(r.regularized);
}

TEST(Solve, RankOneIsIllPosed) {
  const KernelOperator op{uniform_prob(4), Vector::Zero(4), Matrix::Ones(4, 4), false};
  EXPECT_THROW(solve(op, Direction::ones(4), 0.0), IllPosed);
  const SolveResult r = solve(op, Direction::ones(4), 1e-3);
  EXPECT_TRUE(r.regularized);
  EXPECT_DOUBLE_EQ(r.ridge, 1e-3);
}

TEST(Solve, RandomWellConditioned) {
  std::mt19937_64 rng(17);
  const Eigen::Index m = 8;
  const Matrix k = oracle::random_spd(rng, m, 1.0, 3.0);
  const DiscreteMeasure eta = uniform_prob(m);
  const Vector rhs = Vector::LinSpaced(m, -1.0, 2.0);
  const SolveResult r = solve_matrix(k, eta, false, rhs, 0.0);
  EXPECT_LT((k * r.solution.values - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Solve, CenteredSolutionStaysCentered) {
  const DiscreteMeasure eta(Grid({1.0, 2.0, 3.0}, 3.0), Vector{{0.5, 0.25, 0.25}}, MeasureKind::Probability);
  const KernelOperator op{eta, Vector{{1.0, 2.0, 3.0}}, Matrix::Zero(3, 3), true};
  const Direction rhs = center(Direction{Vector{{1.0, 0.0, -1.0}}, false}, eta);
  const SolveResult r = solve(op, rhs, 0.0);
  EXPECT_TRUE(is_centered(r.solution, eta));
  EXPECT_LT((apply(op, r.solution).values - rhs.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RidgeLadder, ResidualsShrinkWithRidge) {
  const Eigen::Index m = 4;
  const Matrix k = Matrix::Constant(m, m, 0.25) + 1e-12 * Matrix::Identity(m, m);
  const auto ladder = ridge_ladder(k, uniform_prob(m), false, Vector::LinSpaced(m, 0.0, 1.0),
                                   default_ridge_ladder());
  ASSERT_EQ(ladder.size(), 9u);
  EXPECT_DOUBLE_EQ(ladder.front().ridge, 1e-2);
  EXPECT_DOUBLE_EQ(ladder.back().ridge, 1e-10);
  for (std::size_t i = 1; i < ladder.size(); ++i) EXPECT_GE(ladder[i].solution_norm, ladder[i - 1].solution_norm);
}

TEST(MinEigen, Examples) {
  EXPECT_NEAR(min_eigen_sym(Matrix{{2.0, 1.0}, {1.0, 2.0}}), 1.0, 1e-14);
  EXPECT_NEAR(min_eigen_sym(Matrix{{1.0, 2.0}, {0.0, 1.0}}), 0.0, 1e-14);
}

TEST(RestrictedForm, CenteringDropsConstants) {
  const Eigen::Index m = 4;
  const KernelOperator op{uniform_prob(m), Vector::Ones(m), Matrix::Zero(m, m), true};
  const Matrix form = restricted_form(as_matrix(op), op.base, true);
  ASSERT_EQ(form.rows(), m - 1);
  EXPECT_LT((form - Matrix::Identity(m - 1, m - 1)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(BlockInformation, ZeroCrossTermGivesItt) {
  BlockInformation b{Matrix{{2.0, 0.5}, {0.5, 1.0}}, Matrix::Zero(2, 1), Matrix{{3.0}}};
  EXPECT_LT((efficient_info_parametric(b) - b.i_tt).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BlockInformation, ScalarExamples) {
  EXPECT_NEAR(efficient_info_parametric({Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}})(0, 0), 0.0, 1e-15);
  const BlockInformation b{Matrix{{2.0}}, Matrix{{1.0}}, Matrix{{2.0}}};
  EXPECT_NEAR(efficient_info_parametric(b)(0, 0), 1.5, 1e-15);
  // 1/1.5 == 1/2 + (1/2)(1)(1/1.5)(1)(1/2)
  EXPECT_LT(block_inverse_identity_check(b), 1e-15);
}

TEST(BlockInformation, RandomPositiveDefinite) {
  std::mt19937_64 rng(29);
  for (int k = 0; k < 10; ++k) {
    const Matrix full = oracle::random_spd(rng, 4);
    const BlockInformation b = BlockInformation::split(full, 2);
    EXPECT_LT((b.full() - full).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(block_inverse_identity_check(b), 1e-10);
    // Efficient information is the inverse of the top-left block of the inverse.
    const Matrix inv_tt = full.inverse().topLeftCorner(2, 2);
    EXPECT_LT((efficient_info_parametric(b) - inv_tt.inverse()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ReciprocalCondition, Examples) {
  EXPECT_NEAR(reciprocal_condition(Matrix{{4.0, 0.0}, {0.0, 1.0}}), 0.25, 1e-15);
  EXPECT_EQ(reciprocal_condition(Matrix::Zero(2, 2)), 0.0);
}
