#include "safegen/lipschitz.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace safegen {
namespace {

using testing::random_margin_system;
using testing::random_task;

std::vector<TaskSample> linear_samples(int n, double slope, Rng& rng) {
  std::vector<TaskSample> s;
  for (int i = 0; i < n; ++i) {
    const Matrix q = random_task(3, rng).Q();
    s.push_back({q, slope * q});
  }
  return s;
}

// Independent O(n^2) reference.
double brute(const std::vector<TaskSample>& s, double eps) {
  double best = 0.0;
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = i + 1; j < s.size(); ++j)
      best = std::max(best, (s[i].K - s[j].K).norm() / ((s[i].Q - s[j].Q).norm() + eps));
  return best;
}

TEST(EstimateLipschitz, Examples) {
  Rng rng(1);
  const auto s = linear_samples(20, 2.0, rng);
  const LipschitzEstimate e = estimate_lipschitz(s);
  EXPECT_NEAR(e.value, 2.0, 1e-9);
  EXPECT_EQ(e.pairs, 190);
  std::vector<TaskSample> same = s;
  for (auto& x : same) x.K = Matrix::Ones(3, 3);
  EXPECT_EQ(estimate_lipschitz(same).value, 0.0);
  EXPECT_THROW(estimate_lipschitz({s[0]}), InvalidInput);
}

TEST(EstimateLipschitz, MatchesReferenceForAnyJobCount) {
  Rng rng(2);
  std::vector<TaskSample> s;
  for (int i = 0; i < 60; ++i) s.push_back({random_task(3, rng).Q(), gaussian_matrix(3, 3, rng)});
  const double ref = brute(s, 1e-12);
  for (int jobs : {1, 2, 5}) EXPECT_EQ(estimate_lipschitz(s, 1e-12, jobs).value, ref);
}

TEST(EstimateLipschitz, SupersetAndScale) {
  Rng rng(3);
  std::vector<TaskSample> s;
  for (int i = 0; i < 40; ++i) s.push_back({random_task(3, rng).Q(), gaussian_matrix(3, 3, rng)});
  const std::vector<TaskSample> half(s.begin(), s.begin() + 20);
  EXPECT_GE(estimate_lipschitz(s).value, estimate_lipschitz(half).value);
  const double base = estimate_lipschitz(s).value;
  for (double c : {-3.0, 0.5, 8.0}) {
    std::vector<TaskSample> t = s;
    for (auto& x : t) x.K *= c;
    EXPECT_NEAR(estimate_lipschitz(t).value, std::abs(c) * base, 1e-12 * std::abs(c) * base);
  }
}

TEST(EstimateLipschitz, LqrBelowUpperBound) {
  Rng rng(4);
  for (int k = 0; k < 10; ++k) {
    const LinearSystem sys = random_margin_system(3, rng);
    std::vector<TaskSample> s;
    for (int i = 0; i < 30; ++i) {
      const TaskMatrix Q = random_task(3, rng);
      s.push_back({Q.Q(), lqr_gain(sys, solve_dare(sys, Q).P)});
    }
    const auto ub = lqr_lipschitz_upper_bound(sys, false);
    ASSERT_TRUE(ub.has_value());
    EXPECT_LE(estimate_lipschitz(s).value, *ub);
  }
}

TEST(RatioExperiment, FigureOneConstants) {
  Rng rng(5);
  const LinearSystem sys = gen_system_commuting(4, 0.2, 0.5, 1.0, 1.0, 0.9, rng);
  const auto tasks = gen_tasks(4, 40, 0.2, rng);
  const LipschitzReport r = ratio_experiment(sys, tasks);
  EXPECT_EQ(r.tasks_total, 120);
  EXPECT_LE(r.tasks_feasible_safe, r.tasks_total);
  ASSERT_TRUE(r.lower_coefficient.has_value());
  EXPECT_GT(r.ratio, 1.0);
  EXPECT_GE(r.ratio, *r.lower_coefficient);
  EXPECT_DOUBLE_EQ(r.ratio, r.L_safe / r.L_unsafe);
  ASSERT_TRUE(r.upper_bound_unsafe.has_value());
  EXPECT_LE(r.L_unsafe, *r.upper_bound_unsafe);
  EXPECT_EQ(r.pairs_unsafe, 120 * 119 / 2);
}

TEST(RatioExperiment, ZeroDisturbanceGivesUnitRatio) {
  Rng rng(6);
  const LinearSystem base = random_margin_system(3, rng);
  const LinearSystem sys(base.A(), base.B(), Matrix::Zero(3, 3), base.R());
  std::vector<TaskMatrix> tasks;
  for (int i = 0; i < 30; ++i) tasks.push_back(random_task(3, rng));
  EXPECT_NEAR(ratio_experiment(sys, tasks).ratio, 1.0, 1e-6);
}

TEST(RatioExperiment, Errors) {
  Rng rng(7);
  const LinearSystem sys = random_margin_system(3, rng);
  EXPECT_THROW(ratio_experiment(sys, {random_task(3, rng)}), InvalidInput);
  std::vector<TaskMatrix> zeros(5, TaskMatrix::zero(3));
  // Every task is feasible but all gains coincide, so the estimate is zero.
  const LipschitzReport r = ratio_experiment(sys, zeros);
  EXPECT_EQ(r.L_safe, 0.0);
}

TEST(RatioExperiment, StableUnderBisectionTolerance) {
  Rng rng(8);
  const LinearSystem sys = gen_system_commuting(4, 0.15, 0.5, 1.0, 1.0, 0.9, rng);
  const auto tasks = gen_tasks(4, 30, 0.15, rng);
  for (bool refine : {true, false}) {
    std::vector<double> ratios;
    for (double tol : {1e-3, 1e-4, 1e-5}) {
      RatioOptions o;
      o.search.rel_tol = tol;
      if (!refine) o.search.refine_rel_tol.reset();
      ratios.push_back(ratio_experiment(sys, tasks, o).ratio);
    }
    // Without refinement the gains carry an O(sqrt(tol)) error near gamma*.
    const double band = refine ? 1e-6 : 0.1;
    for (double r : ratios) EXPECT_NEAR(r, ratios[2], band * ratios[2]);
  }
}

}  // namespace
}  // namespace safegen
