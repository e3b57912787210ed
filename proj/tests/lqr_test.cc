#include "safegen/lqr.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace safegen {
namespace {

using testing::random_margin_system;
using testing::random_task;

const double kScalarP = (0.25 + std::sqrt(4.0625)) / 2.0;  // p^2 - 0.25 p - 1 = 0

TEST(InputWeight, Examples) {
  Rng rng(1);
  const LinearSystem sys = random_margin_system(3, rng);
  EXPECT_EQ(input_weight(sys, Matrix::Zero(3, 3)), sys.R());
  const LinearSystem s = LinearSystem::scalar(0.5, 1, 1, 1);
  EXPECT_DOUBLE_EQ(input_weight(s, Matrix::Constant(1, 1, 1.0))(0, 0), 2.0);
  const Matrix g = gaussian_matrix(3, 3, rng);
  const Matrix P = g * g.transpose();
  EXPECT_GE(min_eigenvalue(symmetrize(input_weight(sys, P))), min_eigenvalue(sys.R()) - 1e-12);
}

TEST(RiccatiOperator, Examples) {
  const LinearSystem s = LinearSystem::scalar(0.5, 1, 1, 1);
  EXPECT_EQ(riccati_operator(s, TaskMatrix::scalar(0), Matrix::Zero(1, 1))(0, 0), 0.0);
  EXPECT_NEAR(riccati_operator(s, TaskMatrix::scalar(1), Matrix::Constant(1, 1, 1.0))(0, 0), 1.125, 1e-15);
}

TEST(RiccatiOperator, OutputSymmetricPsdAndInsideSet) {
  Rng rng(2);
  for (int k = 0; k < 30; ++k) {
    const LinearSystem sys = random_margin_system(4, rng);
    const TaskMatrix Q = random_task(4, rng);
    // A point of the invariant set.
    const Matrix g = gaussian_matrix(4, 4, rng);
    Matrix P = g * g.transpose();
    P *= riccati_set_radius(sys.norms()) / spectral_norm(P);
    const Matrix T = riccati_operator(sys, Q, P);
    EXPECT_TRUE(is_symmetric(T, 0.0));
    EXPECT_GE(min_eigenvalue(T), -1e-12);
    EXPECT_LE(spectral_norm(T), riccati_set_radius(sys.norms()) + 1e-12);
  }
}

TEST(SolveDare, Examples) {
  const LinearSystem s = LinearSystem::scalar(0.5, 1, 1, 1);
  const RiccatiSolution zero = solve_dare(s, TaskMatrix::scalar(0));
  EXPECT_TRUE(zero.converged);
  EXPECT_EQ(zero.P(0, 0), 0.0);
  EXPECT_EQ(lqr_gain(s, zero.P)(0, 0), 0.0);

  const RiccatiSolution sol = solve_dare(s, TaskMatrix::scalar(1));
  EXPECT_TRUE(sol.converged);
  EXPECT_NEAR(sol.P(0, 0), kScalarP, 1e-11);
  EXPECT_NEAR(sol.P(0, 0), 1.13278, 1e-5);
  EXPECT_LE((riccati_operator(s, TaskMatrix::scalar(1), sol.P) - sol.P).norm(), 1e-12);
}

TEST(SolveDare, MatchesNewtonOracle) {
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const int dim = 2 + k % 5;
    const LinearSystem sys = random_margin_system(dim, rng);
    const TaskMatrix Q = random_task(dim, rng);
    const RiccatiSolution sol = solve_dare(sys, Q);
    ASSERT_TRUE(sol.converged);
    const Matrix ref = testing::dare_newton_oracle(sys, Q.Q());
    EXPECT_LE((sol.P - ref).norm(), 1e-9);
  }
}

TEST(SolveDare, NonConvergenceIsReported) {
  Rng rng(4);
  const LinearSystem sys = random_margin_system(3, rng);
  DareOptions opts;
  opts.max_iter = 2;
  const RiccatiSolution sol = solve_dare(sys, random_task(3, rng), opts);
  EXPECT_FALSE(sol.converged);
  EXPECT_GT(sol.residual, 0.0);
}

TEST(LqrGain, Examples) {
  const LinearSystem s = LinearSystem::scalar(0.5, 1, 1, 1);
  EXPECT_EQ(lqr_gain(s, Matrix::Zero(1, 1))(0, 0), 0.0);
  const double p = solve_dare(s, TaskMatrix::scalar(1)).P(0, 0);
  EXPECT_NEAR(lqr_gain(s, Matrix::Constant(1, 1, p))(0, 0), -(kScalarP * 0.5) / (1 + kScalarP), 1e-11);
  EXPECT_NEAR(lqr_gain(s, Matrix::Constant(1, 1, p))(0, 0), -0.26557, 1e-5);
}

TEST(LqrGain, ClosedLoopDecays) {
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const LinearSystem sys = random_margin_system(4, rng);
    const Matrix K = lqr_gain(sys, solve_dare(sys, random_task(4, rng)).P);
    EXPECT_LT(spectral_norm(matrix_power(sys.A() + sys.B() * K, 64)), 1e-3);
  }
}

TEST(ContractionConstant, Examples) {
  EXPECT_EQ(contraction_constant(SystemNorms{0.0, 0.5, 1.0, 1.0}), 0.0);
  const double expect = 0.16 * std::pow(1 + 0.25 / 0.84, 2);
  EXPECT_NEAR(contraction_constant(SystemNorms{0.4, 0.5, 1.0, 1.0}), expect, 1e-15);
  EXPECT_NEAR(expect, 0.26941, 1e-5);
  Rng rng(6);
  for (int k = 0; k < 100; ++k) EXPECT_LT(contraction_constant(random_margin_system(3, rng)), 0.5);
}

TEST(LipschitzBound, Examples) {
  const auto loose = lqr_lipschitz_upper_bound(SystemNorms{0.2, 0.5, 1.0, 1.0}, false);
  ASSERT_TRUE(loose.has_value());
  EXPECT_NEAR(*loose, 0.3, 1e-15);
  EXPECT_NEAR(*lqr_lipschitz_upper_bound(SystemNorms{1e-9, 0.5, 1.0, 1.0}, false), 0.0, 1e-8);
  EXPECT_FALSE(lqr_lipschitz_upper_bound(SystemNorms{0.4, 0.5, 1.0, 1.0}, false).has_value());
  EXPECT_FALSE(lqr_lipschitz_upper_bound(SystemNorms{0.4, 0.5, 1.0, 1.0}, true).has_value());
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    const LinearSystem sys = random_margin_system(3, rng);
    EXPECT_LE(*lqr_lipschitz_upper_bound(sys, true), *lqr_lipschitz_upper_bound(sys, false));
  }
}

TEST(StabilityThreshold, Example) {
  EXPECT_NEAR(stability_threshold(0.5, 1.0), 1 - 1 / (1 + 1 / (std::sqrt(2.0) * 1.25)), 1e-15);
  EXPECT_NEAR(stability_threshold(0.5, 1.0), 0.36130, 1e-5);
}

TEST(DareProperties, FixedPointAndGainLipschitz) {
  Rng rng(8);
  for (int k = 0; k < 30; ++k) {
    const LinearSystem sys = random_margin_system(4, rng);
    const double gamma = contraction_constant(sys);
    const double sharp = *lqr_lipschitz_upper_bound(sys, true);
    for (int pair = 0; pair < 10; ++pair) {
      const TaskMatrix Q1 = random_task(4, rng), Q2 = random_task(4, rng);
      const Matrix P1 = solve_dare(sys, Q1).P, P2 = solve_dare(sys, Q2).P;
      const double dq = (Q1.Q() - Q2.Q()).norm();
      EXPECT_LE((P1 - P2).norm(), dq / (1 - gamma) + 1e-6);
      EXPECT_LE((lqr_gain(sys, P1) - lqr_gain(sys, P2)).norm(), sharp * dq + 1e-6);
    }
  }
}

TEST(DareProperties, UniquenessAndSetMembership) {
  Rng rng(9);
  for (int k = 0; k < 30; ++k) {
    const LinearSystem sys = random_margin_system(4, rng);
    const TaskMatrix Q = random_task(4, rng);
    const RiccatiSolution a = solve_dare(sys, Q);
    const RiccatiSolution b = solve_dare(sys, Q, {}, Q.Q());
    const double tol = 1e-12 * std::max(1.0, Q.Q().norm());
    EXPECT_LE((a.P - b.P).norm(), 10 * tol);
    EXPECT_GE(min_eigenvalue(a.P), -1e-8);
    EXPECT_LE(spectral_norm(a.P), riccati_set_radius(sys.norms()) + 1e-8);
  }
}

TEST(LinearSystem, Validation) {
  EXPECT_THROW(LinearSystem::scalar(1.0, 1, 1, 1), InvalidInput);
  EXPECT_THROW(LinearSystem::scalar(0.5, 0, 1, 1), InvalidInput);
  EXPECT_THROW(LinearSystem::scalar(0.5, 1, 1, -1), InvalidInput);
  EXPECT_THROW(TaskMatrix::scalar(-0.1), InvalidInput);
  EXPECT_THROW(TaskMatrix::scalar(1.1), InvalidInput);
  const LinearSystem s = LinearSystem::scalar(-0.5, 2, 0, 4);
  EXPECT_DOUBLE_EQ(s.norms().A, 0.5);
  EXPECT_DOUBLE_EQ(s.norms().B, 2.0);
  EXPECT_DOUBLE_EQ(s.norms().Rinv, 0.25);
}

}  // namespace
}  // namespace safegen
