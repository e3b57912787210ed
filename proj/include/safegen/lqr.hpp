#pragma once

#include <limits>
#include <optional>

#include "safegen/system.hpp"

namespace safegen {

struct RiccatiSolution {
  Matrix P;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct DareOptions {
  std::optional<double> tol;  // default 1e-12 * max(1, ||Q||_F)
  int max_iter = 100000;
};

/// X(P) = R + B^T P B
inline Matrix input_weight(const LinearSystem& sys, const Matrix& P) {
  return sys.R() + sys.B().transpose() * P * sys.B();
}

/// T_Q(P) = A^T P A + Q - A^T P B X(P)^{-1} B^T P A
inline Matrix riccati_operator(const LinearSystem& sys, const TaskMatrix& Q, const Matrix& P) {
  const Matrix PA = P * sys.A();
  const Matrix BtPA = sys.B().transpose() * PA;
  const Matrix X = input_weight(sys, P);
  Matrix out = sys.A().transpose() * PA + Q.Q() - BtPA.transpose() * solve_spd(symmetrize(X), BtPA);
  return symmetrize(out);
}

inline RiccatiSolution solve_dare(const LinearSystem& sys, const TaskMatrix& Q, const DareOptions& opts = {},
                                  const std::optional<Matrix>& P0 = std::nullopt) {
  const double tol = opts.tol.value_or(1e-12 * std::max(1.0, Q.Q().norm()));
  if (!(tol > 0.0)) throw InvalidInput("solve_dare: tol must be positive");
  RiccatiSolution sol;
  sol.P = P0 ? symmetrize(*P0) : Matrix::Zero(sys.dim(), sys.dim());
  sol.residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iter; ++it) {
    Matrix next = riccati_operator(sys, Q, sol.P);
    sol.residual = (next - sol.P).norm();
    sol.P = std::move(next);
    sol.iterations = it + 1;
    if (sol.residual <= tol) {
      sol.converged = true;
      break;
    }
  }
  // Report the residual of the returned matrix itself.
  sol.residual = (riccati_operator(sys, Q, sol.P) - sol.P).norm();
  sol.converged = sol.converged && sol.residual <= tol;
  return sol;
}

/// K = -X(P)^{-1} B^T P A
inline Matrix lqr_gain(const LinearSystem& sys, const Matrix& P) {
  return -solve_spd(symmetrize(input_weight(sys, P)), sys.B().transpose() * P * sys.A());
}

/// Right-hand side of the stability-margin condition on ||A||.
inline double stability_threshold(double normB, double normRinv) {
  const double s2 = std::sqrt(2.0);
  return 1.0 - 1.0 / (1.0 + 1.0 / (s2 + s2 * normB * normB * normRinv));
}

inline bool stability_margin_holds(const SystemNorms& n) {
  return n.A < stability_threshold(n.B, n.Rinv) - 1e-12;
}

inline double contraction_constant(const SystemNorms& n) {
  if (!(n.A < 1.0)) throw InvalidInput("contraction_constant: need ||A|| < 1");
  const double inner = 1.0 + n.B * n.B * n.Rinv / (1.0 - n.A * n.A);
  return n.A * n.A * inner * inner;
}

inline double contraction_constant(const LinearSystem& sys) { return contraction_constant(sys.norms()); }

/// Lipschitz bound for Q -> K_lqr(Q). Empty when the stability margin fails.
inline std::optional<double> lqr_lipschitz_upper_bound(const SystemNorms& n, bool sharp) {
  if (!stability_margin_holds(n)) return std::nullopt;
  const double b2r = n.B * n.B * n.Rinv;
  if (!sharp) return 2.0 * n.A * n.B * n.Rinv * (1.0 + 2.0 * b2r);
  const double gamma = contraction_constant(n);
  return (1.0 / (1.0 - gamma)) * n.A * n.B * n.Rinv * (1.0 + b2r / (1.0 - n.A * n.A));
}

inline std::optional<double> lqr_lipschitz_upper_bound(const LinearSystem& sys, bool sharp) {
  return lqr_lipschitz_upper_bound(sys.norms(), sharp);
}

/// Radius of the invariant set: ||P||_2 <= 1/(1-||A||^2).
inline double riccati_set_radius(const SystemNorms& n) { return 1.0 / (1.0 - n.A * n.A); }

}  // namespace safegen
