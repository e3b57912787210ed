#pragma once

// Pairwise-sampled Lipschitz estimates of the task -> gain mappings.

#include <cstdint>
#include <optional>
#include <vector>

#include "safegen/parallel.hpp"
#include "safegen/sysgen.hpp"

namespace safegen {

class ExperimentDegenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TaskSample {
  Matrix Q;
  Matrix K;
};

struct LipschitzEstimate {
  double value = 0.0;
  std::int64_t pairs = 0;
};

/// max over i < j of ||K_i - K_j||_F / (||Q_i - Q_j||_F + eps)
inline LipschitzEstimate estimate_lipschitz(const std::vector<TaskSample>& samples, double eps = 1e-12,
                                            int jobs = 1) {
  if (samples.size() < 2) throw InvalidInput("estimate_lipschitz: need at least two samples");
  if (!(eps > 0.0)) throw InvalidInput("estimate_lipschitz: eps must be positive");
  const auto n = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index dq = samples[0].Q.size(), dk = samples[0].K.size();
  Matrix qs(dq, n), ks(dk, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (samples[i].Q.size() != dq || samples[i].K.size() != dk)
      throw InvalidInput("estimate_lipschitz: inconsistent sample shapes");
    qs.col(i) = Eigen::Map<const Vector>(samples[i].Q.data(), dq);
    ks.col(i) = Eigen::Map<const Vector>(samples[i].K.data(), dk);
  }
  std::vector<double> row_max(static_cast<size_t>(n), 0.0);
  parallel_for(static_cast<size_t>(n), jobs, [&](size_t i) {
    double m = 0.0;
    for (Eigen::Index j = static_cast<Eigen::Index>(i) + 1; j < n; ++j) {
      const double num = (ks.col(i) - ks.col(j)).norm();
      const double den = (qs.col(i) - qs.col(j)).norm() + eps;
      m = std::max(m, num / den);
    }
    row_max[i] = m;
  });
  LipschitzEstimate out;
  for (double v : row_max) out.value = std::max(out.value, v);
  out.pairs = static_cast<std::int64_t>(n) * (n - 1) / 2;
  return out;
}

struct LipschitzReport {
  double L_unsafe = 0.0;
  double L_safe = 0.0;
  double ratio = 0.0;
  int tasks_total = 0;
  int tasks_feasible_safe = 0;
  int tasks_converged_unsafe = 0;
  std::optional<double> upper_bound_unsafe;
  std::optional<double> lower_coefficient;
  std::int64_t pairs_unsafe = 0;
  std::int64_t pairs_safe = 0;
};

struct RatioOptions {
  GammaSearchOptions search;
  double eps = 1e-12;
  int jobs = 1;
};

/// Per-task controllers for both teachers. Entries are empty where the
/// solver did not produce a certified answer.
struct TeacherGains {
  std::vector<std::optional<Matrix>> lqr;
  std::vector<std::optional<Matrix>> hinf;
};

inline TeacherGains synthesize_teachers(const LinearSystem& sys, const std::vector<TaskMatrix>& tasks,
                                        const GammaSearchOptions& search, int jobs = 1) {
  TeacherGains out;
  out.lqr.resize(tasks.size());
  out.hinf.resize(tasks.size());
  parallel_for(tasks.size(), jobs, [&](size_t i) {
    const RiccatiSolution dare = solve_dare(sys, tasks[i]);
    if (dare.converged) out.lqr[i] = lqr_gain(sys, dare.P);
    try {
      out.hinf[i] = gamma_star(sys, tasks[i], search).Ku;
    } catch (const InfeasibleTask&) {
    } catch (const DefinitenessError&) {
    }
  });
  return out;
}

inline LipschitzReport ratio_experiment(const LinearSystem& sys, const std::vector<TaskMatrix>& tasks,
                                        const RatioOptions& opts = {}) {
  if (tasks.size() < 2) throw InvalidInput("ratio_experiment: need at least two tasks");
  const TeacherGains gains = synthesize_teachers(sys, tasks, opts.search, opts.jobs);
  std::vector<TaskSample> unsafe, safe;
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (gains.lqr[i]) unsafe.push_back({tasks[i].Q(), *gains.lqr[i]});
    if (gains.hinf[i]) safe.push_back({tasks[i].Q(), *gains.hinf[i]});
  }
  LipschitzReport rep;
  rep.tasks_total = static_cast<int>(tasks.size());
  rep.tasks_feasible_safe = static_cast<int>(safe.size());
  rep.tasks_converged_unsafe = static_cast<int>(unsafe.size());
  if (safe.size() < 2) throw ExperimentDegenerate("ratio_experiment: fewer than two feasible safe tasks");
  if (unsafe.size() < 2) throw ExperimentDegenerate("ratio_experiment: fewer than two converged LQR tasks");
  const LipschitzEstimate lu = estimate_lipschitz(unsafe, opts.eps, opts.jobs);
  const LipschitzEstimate ls = estimate_lipschitz(safe, opts.eps, opts.jobs);
  rep.L_unsafe = lu.value;
  rep.L_safe = ls.value;
  rep.pairs_unsafe = lu.pairs;
  rep.pairs_safe = ls.pairs;
  rep.ratio = (rep.L_unsafe > 0.0 && rep.L_safe > 0.0) ? rep.L_safe / rep.L_unsafe
              : (rep.L_safe == rep.L_unsafe)         ? 1.0
                                                     : std::numeric_limits<double>::infinity();
  rep.upper_bound_unsafe = lqr_lipschitz_upper_bound(sys, false);
  rep.lower_coefficient = separation_lower_coefficient(sys);
  return rep;
}

}  // namespace safegen
