#pragma once

#include <cmath>

#include "safegen/linalg.hpp"

namespace safegen::nn {

struct AdamState {
  Vector m;
  Vector v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(Eigen::Index n = 0) : m(Vector::Zero(n)), v(Vector::Zero(n)) {}
};

/// One bias-corrected Adam update of params in place.
inline void adam_step(AdamState& state, Vector& params, const Vector& grad, double lr) {
  if (grad.size() != params.size() || state.m.size() != params.size())
    throw InvalidInput("adam_step: shape mismatch");
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

}  // namespace safegen::nn
