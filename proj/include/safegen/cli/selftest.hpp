#pragma once

// Quick sanity checks against closed forms; runs in well under a second.

#include <functional>

#include "safegen/cli/context.hpp"
#include "safegen/hinf.hpp"
#include "safegen/nn/adam.hpp"
#include "safegen/nn/mlp.hpp"

namespace safegen::cli {

inline int run_selftest(RunContext& ctx) {
  std::vector<std::pair<std::string, std::function<bool()>>> checks;
  checks.emplace_back("dare scalar a=0.5 b=1 r=1 q=1", [] {
    const LinearSystem s = LinearSystem::scalar(0.5, 1, 1, 1);
    const Matrix P = solve_dare(s, TaskMatrix::scalar(1.0)).P;
    return std::abs(P(0, 0) - 1.1327822) < 1e-6 && std::abs(lqr_gain(s, P)(0, 0) + 0.2655644) < 1e-6;
  });
  checks.emplace_back("gamma_star scalar a=0.5 b=d=r=1 q=0.1", [] {
    const HinfSynthesis h = gamma_star(LinearSystem::scalar(0.5, 1, 1, 1), TaskMatrix::scalar(0.1));
    return std::abs(h.gamma_star - std::sqrt(0.4 / 1.4)) < 1e-4 * h.gamma_star && std::abs(h.Ku(0, 0) + 0.2) < 2e-5;
  });
  checks.emplace_back("closed-form gain minimizes the robust objective", [] {
    const double k = scalar_optimal_gain(-0.6, 0.8, 2.0, 0.3);
    const double v = scalar_robust_objective(-0.6, 0.8, 1.0, 2.0, 0.3, k);
    for (double dk : {-1e-3, 1e-3})
      if (scalar_robust_objective(-0.6, 0.8, 1.0, 2.0, 0.3, k + dk) < v) return false;
    return std::abs(v - scalar_optimal_value(-0.6, 0.8, 1.0, 2.0, 0.3)) < 1e-12;
  });
  checks.emplace_back("mlp gradient matches finite differences", [] {
    nn::MlpModel m(nn::MlpShape{3, 2, 6, 3});
    m.initialize(1);
    Rng rng(2);
    const Matrix X = gaussian_matrix(3, 4, rng), Y = gaussian_matrix(2, 4, rng);
    nn::ForwardCache c;
    Matrix g;
    nn::mse_loss(nn::mlp_forward(m, X, &c), Y, &g);
    const Vector grad = nn::mlp_backward(m, c, g);
    for (Eigen::Index i = 0; i < m.num_params(); i += 7) {
      const double keep = m.params()(i);
      m.params()(i) = keep + 1e-5;
      const double up = nn::mse_loss(nn::mlp_forward(m, X), Y);
      m.params()(i) = keep - 1e-5;
      const double dn = nn::mse_loss(nn::mlp_forward(m, X), Y);
      m.params()(i) = keep;
      const double fd = (up - dn) / 2e-5;
      if (std::abs(fd - grad(i)) > 1e-4 * std::max({std::abs(fd), std::abs(grad(i)), 1e-6})) return false;
    }
    return true;
  });
  checks.emplace_back("adam first step is -lr sign(g)", [] {
    nn::AdamState st(1);
    Vector p = Vector::Zero(1);
    nn::adam_step(st, p, Vector::Constant(1, -3.0), 0.01);
    return std::abs(p(0) - 0.01) < 1e-8;
  });

  std::string report;
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    bool ok = false;
    std::string why;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      why = std::string(" (") + e.what() + ")";
    }
    failed += !ok;
    report += std::string(ok ? "PASS " : "FAIL ") + name + why + "\n";
    ctx.cells.push_back({name, 0, ok ? "ok" : "failed", 0.0});
  }
  ctx.write_text("selftest.txt", report);
  *ctx.out << report;
  return failed ? 1 : 0;
}

}  // namespace safegen::cli
