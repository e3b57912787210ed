#pragma once

// Level-gamma dynamic game Riccati solves, the search for the smallest
// feasible level, and the scalar/diagonal closed forms.

#include <array>
#include <optional>
#include <string>

#include "safegen/lqr.hpp"

namespace safegen {

enum class GameBlock { control, disturbance };

class GameDefinitenessError : public DefinitenessError {
 public:
  GameDefinitenessError(GameBlock block, double value)
      : DefinitenessError(block == GameBlock::control ? "control block R + B'PB is not positive definite"
                                                      : "disturbance block D'PD - gamma^2 I is not negative definite",
                          value),
        block_(block) {}
  GameBlock block() const { return block_; }

 private:
  GameBlock block_;
};

class InfeasibleTask : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ClosedLoopUnstable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class InfeasibleReason { none, control_block_indefinite, disturbance_block_not_negative, diverged, max_iter };

inline const char* to_string(InfeasibleReason r) {
  switch (r) {
    case InfeasibleReason::none: return "none";
    case InfeasibleReason::control_block_indefinite: return "control-block-indefinite";
    case InfeasibleReason::disturbance_block_not_negative: return "disturbance-block-not-negative";
    case InfeasibleReason::diverged: return "diverged";
    case InfeasibleReason::max_iter: return "max-iter";
  }
  return "?";
}

struct GammaFeasibility {
  bool feasible = false;
  Matrix P;  // meaningful only when feasible
  InfeasibleReason reason = InfeasibleReason::none;
  int iterations = 0;
  double residual = 0.0;
};

struct DgareBlocks {
  Matrix H;  // 2d x 2d
  Matrix F;  // 2d x d
};

inline DgareBlocks dgare_blocks(const LinearSystem& sys, const Matrix& P, double gamma) {
  const int n = sys.dim();
  const Matrix PB = P * sys.B(), PD = P * sys.D(), PA = P * sys.A();
  DgareBlocks out{Matrix(2 * n, 2 * n), Matrix(2 * n, n)};
  out.H.topLeftCorner(n, n) = sys.R() + sys.B().transpose() * PB;
  out.H.topRightCorner(n, n) = sys.B().transpose() * PD;
  out.H.bottomLeftCorner(n, n) = sys.D().transpose() * PB;
  out.H.bottomRightCorner(n, n) = sys.D().transpose() * PD - gamma * gamma * Matrix::Identity(n, n);
  out.F.topRows(n) = sys.B().transpose() * PA;
  out.F.bottomRows(n) = sys.D().transpose() * PA;
  return out;
}

/// eps_def = 1e-10 (1 + ||P||_2)
inline double definiteness_margin(const Matrix& P) { return 1e-10 * (1.0 + spectral_norm(P)); }

namespace detail {

// Exact check through eigenvalues.
inline std::optional<std::pair<GameBlock, double>> game_block_failure(const LinearSystem& sys, const Matrix& P,
                                                                      double gamma, double margin) {
  const Matrix X = symmetrize(sys.R() + sys.B().transpose() * P * sys.B());
  const double xmin = jacobi_eig(X).eigenvalues(0);
  if (!(xmin > margin)) return std::make_pair(GameBlock::control, xmin);
  const Matrix Y = symmetrize(sys.D().transpose() * P * sys.D());
  const Vector ev = jacobi_eig(Y).eigenvalues;
  const double ymax = ev(ev.size() - 1) - gamma * gamma;
  if (!(ymax < -margin)) return std::make_pair(GameBlock::disturbance, ymax);
  return std::nullopt;
}

// Cheap check used inside iterations: Cholesky of the shifted blocks, margin
// taken with ||P||_F >= ||P||_2.
inline std::optional<GameBlock> game_block_failure_fast(const LinearSystem& sys, const Matrix& P, double gamma) {
  const int n = sys.dim();
  const double margin = 1e-10 * (1.0 + P.norm());
  const Matrix I = Matrix::Identity(n, n);
  Eigen::LLT<Matrix> x(symmetrize(sys.R() + sys.B().transpose() * P * sys.B()) - margin * I);
  if (x.info() != Eigen::Success) return GameBlock::control;
  Eigen::LLT<Matrix> w((gamma * gamma - margin) * I - symmetrize(sys.D().transpose() * P * sys.D()));
  if (w.info() != Eigen::Success) return GameBlock::disturbance;
  return std::nullopt;
}

// H^{-1} F by block elimination on the SPD control block and the negative
// definite Schur complement of the disturbance block. Requires both blocks to
// be definite.
inline Matrix solve_game_blocks(const LinearSystem& sys, const Matrix& P, double gamma) {
  const int n = sys.dim();
  const Matrix BtP = sys.B().transpose() * P;
  const Matrix DtP = sys.D().transpose() * P;
  const Matrix X = symmetrize(sys.R() + BtP * sys.B());
  const Matrix C = BtP * sys.D();  // B'PD
  const Matrix W = symmetrize(gamma * gamma * Matrix::Identity(n, n) - DtP * sys.D());
  const Matrix f1 = BtP * sys.A(), f2 = DtP * sys.A();
  Eigen::LLT<Matrix> xl(X);
  const Matrix XiC = xl.solve(C), Xif1 = xl.solve(f1);
  // H = [[X, C], [C', -W]];  S = -W - C' X^{-1} C, solve with -S SPD.
  Eigen::LLT<Matrix> sl(symmetrize(W + C.transpose() * XiC));
  const Matrix y2 = -sl.solve(f2 - C.transpose() * Xif1);
  Matrix y(2 * n, n);
  y.topRows(n) = Xif1 - XiC * y2;
  y.bottomRows(n) = y2;
  return y;
}

inline Matrix dgare_apply(const LinearSystem& sys, const TaskMatrix& Q, double gamma, const Matrix& P) {
  const int n = sys.dim();
  const Matrix y = solve_game_blocks(sys, P, gamma);
  const Matrix PA = P * sys.A();
  const Matrix F1 = sys.B().transpose() * PA, F2 = sys.D().transpose() * PA;
  Matrix out = Q.Q() + sys.A().transpose() * PA - F1.transpose() * y.topRows(n) - F2.transpose() * y.bottomRows(n);
  return symmetrize(out);
}

inline InfeasibleReason reason_for(GameBlock b) {
  return b == GameBlock::control ? InfeasibleReason::control_block_indefinite
                                 : InfeasibleReason::disturbance_block_not_negative;
}

inline GammaFeasibility infeasible(InfeasibleReason r, int iterations) {
  GammaFeasibility g;
  g.reason = r;
  g.iterations = iterations;
  return g;
}

}  // namespace detail

/// Q + A'PA - F' H^{-1} F, after checking both definiteness conditions.
inline Matrix dgare_operator(const LinearSystem& sys, const TaskMatrix& Q, double gamma, const Matrix& P) {
  if (auto fail = detail::game_block_failure(sys, P, gamma, definiteness_margin(P)))
    throw GameDefinitenessError(fail->first, fail->second);
  return detail::dgare_apply(sys, Q, gamma, P);
}

inline constexpr double kDivergenceNorm = 1e8;

/// Fixed-point iteration P <- DGARE(P) from P0 (the DARE solution when absent).
inline GammaFeasibility solve_dgare(const LinearSystem& sys, const TaskMatrix& Q, double gamma,
                                    const std::optional<Matrix>& P0 = std::nullopt, double tol = 1e-10,
                                    int max_iter = 20000) {
  Matrix P = P0 ? symmetrize(*P0) : solve_dare(sys, Q).P;
  for (int it = 0; it < max_iter; ++it) {
    if (auto blk = detail::game_block_failure_fast(sys, P, gamma))
      return detail::infeasible(detail::reason_for(*blk), it);
    Matrix next = detail::dgare_apply(sys, Q, gamma, P);
    if (!next.allFinite() || next.norm() > kDivergenceNorm) return detail::infeasible(InfeasibleReason::diverged, it + 1);
    const double step = (next - P).norm();
    P = std::move(next);
    if (step <= tol) {
      if (auto fail = detail::game_block_failure(sys, P, gamma, definiteness_margin(P)))
        return detail::infeasible(detail::reason_for(fail->first), it + 1);
      GammaFeasibility g;
      g.residual = (detail::dgare_apply(sys, Q, gamma, P) - P).norm();
      if (g.residual > tol) continue;
      g.feasible = true;
      g.P = std::move(P);
      g.iterations = it + 1;
      return g;
    }
  }
  return detail::infeasible(InfeasibleReason::max_iter, max_iter);
}

/// Same fixed point, reached by doubling: after k steps the iterate equals the
/// 2^k-th fixed-point iterate started from P = 0. Each doubling is checked for
/// definiteness, monotone growth and divergence, so an iteration that would
/// leave the feasible region is caught at the first doubling that passes it.
inline GammaFeasibility solve_dgare_doubling(const LinearSystem& sys, const TaskMatrix& Q, double gamma,
                                             double tol = 1e-10, int max_doublings = 64) {
  const int n = sys.dim();
  const Matrix I = Matrix::Identity(n, n);
  if (!(gamma > 0.0)) return detail::infeasible(InfeasibleReason::disturbance_block_not_negative, 0);
  if (auto blk = detail::game_block_failure_fast(sys, Matrix::Zero(n, n), gamma))
    return detail::infeasible(detail::reason_for(*blk), 0);
  Matrix Ak = sys.A();
  Matrix Gk = symmetrize(sys.B() * sys.R_inverse() * sys.B().transpose() -
                         sys.D() * sys.D().transpose() / (gamma * gamma));
  Matrix Hk = Q.Q();
  for (int k = 0; k < max_doublings; ++k) {
    if (auto blk = detail::game_block_failure_fast(sys, Hk, gamma))
      return detail::infeasible(detail::reason_for(*blk), k);
    Eigen::PartialPivLU<Matrix> lu(I + Gk * Hk);
    if (!(std::abs(lu.determinant()) > 1e-300)) return detail::infeasible(InfeasibleReason::diverged, k);
    const Matrix WiA = lu.solve(Ak);
    const Matrix WiG = lu.solve(Gk);
    const Matrix dH = symmetrize(Ak.transpose() * Hk * WiA);
    Matrix Gn = symmetrize(Gk + Ak * WiG * Ak.transpose());
    Matrix An = Ak * WiA;
    Matrix Hn = Hk + dH;
    if (!Hn.allFinite() || Hn.norm() > kDivergenceNorm) return detail::infeasible(InfeasibleReason::diverged, k + 1);
    // The fixed-point sequence from zero is nondecreasing while it stays feasible.
    const double floor = -1e-9 * (1.0 + Hn.norm());
    if (detail::jacobi_eig(dH).eigenvalues(0) < floor) return detail::infeasible(InfeasibleReason::diverged, k + 1);
    const double step = dH.norm();
    Ak = std::move(An);
    Gk = std::move(Gn);
    Hk = std::move(Hn);
    if (step <= tol) {
      if (auto fail = detail::game_block_failure(sys, Hk, gamma, definiteness_margin(Hk)))
        return detail::infeasible(detail::reason_for(fail->first), k + 1);
      const double residual = (detail::dgare_apply(sys, Q, gamma, Hk) - Hk).norm();
      if (residual > tol) continue;
      GammaFeasibility g;
      g.feasible = true;
      g.P = std::move(Hk);
      g.iterations = k + 1;
      g.residual = residual;
      return g;
    }
  }
  return detail::infeasible(InfeasibleReason::max_iter, max_doublings);
}

struct LevelGains {
  Matrix Ku;
  Matrix Kw;
};

/// [Ku; Kw] = -H(P;gamma)^{-1} F(P)
inline LevelGains level_gamma_gains(const LinearSystem& sys, const Matrix& P, double gamma) {
  if (auto fail = detail::game_block_failure(sys, P, gamma, definiteness_margin(P)))
    throw GameDefinitenessError(fail->first, fail->second);
  const int n = sys.dim();
  const Matrix y = detail::solve_game_blocks(sys, P, gamma);
  return {-y.topRows(n), -y.bottomRows(n)};
}

enum class DgareMethod { doubling, fixed_point };

struct GammaSearchOptions {
  double rel_tol = 1e-4;
  // Further bracket refinement before the gains are read off. The gain has a
  // square-root sensitivity to the distance from the boundary, so the default
  // goes well below rel_tol. Empty means rel_tol / 2.
  std::optional<double> refine_rel_tol = 1e-12;
  double gamma_cap = 1e6;
  DgareMethod method = DgareMethod::doubling;
  double dgare_tol = 1e-10;
  int dgare_max_iter = 20000;
};

struct HinfSynthesis {
  double gamma_star = 0.0;
  Matrix P;
  Matrix Ku;
  Matrix Kw;
  double bisection_width = 0.0;  // (hi - lo) / hi of the final bracket
  double gamma_infeasible = 0.0;  // lower end of the final bracket
  int levels = 0;
};

inline GammaFeasibility solve_level(const LinearSystem& sys, const TaskMatrix& Q, double gamma,
                                    const GammaSearchOptions& opts, const Matrix& warm) {
  if (opts.method == DgareMethod::doubling) return solve_dgare_doubling(sys, Q, gamma, opts.dgare_tol);
  return solve_dgare(sys, Q, gamma, warm, opts.dgare_tol, opts.dgare_max_iter);
}

inline HinfSynthesis gamma_star(const LinearSystem& sys, const TaskMatrix& Q, const GammaSearchOptions& opts = {}) {
  if (!(opts.rel_tol > 0.0 && opts.rel_tol <= 1e-2)) throw InvalidInput("gamma_star: rel_tol must lie in (0, 1e-2]");
  if (Q.dim() != sys.dim()) throw InvalidInput("gamma_star: task dimension mismatch");
  const int n = sys.dim();
  HinfSynthesis out;
  if (Q.Q().norm() == 0.0) {
    out.P = Matrix::Zero(n, n);
    out.Ku = Matrix::Zero(n, n);
    out.Kw = Matrix::Zero(n, n);
    return out;
  }
  const RiccatiSolution dare = solve_dare(sys, Q);
  const Matrix DPD = symmetrize(sys.D().transpose() * dare.P * sys.D());
  const Vector dpd_ev = detail::jacobi_eig(DPD).eigenvalues;
  double lo = std::sqrt(std::max(0.0, dpd_ev(dpd_ev.size() - 1)));
  double hi = std::max(lo, 1.0);
  Matrix warm = dare.P;
  GammaFeasibility best;
  auto level = [&](double g) {
    ++out.levels;
    GammaFeasibility r = solve_level(sys, Q, g, opts, warm);
    return r;
  };

  for (;;) {
    GammaFeasibility r = level(hi);
    if (r.feasible) {
      best = std::move(r);
      warm = best.P;
      break;
    }
    lo = std::max(lo, hi);
    hi *= 2.0;
    if (hi > opts.gamma_cap) throw InfeasibleTask("gamma_star: no feasible level below the cap");
  }
  if (!(lo > 0.0)) {
    // The seed gives no information (D'P D = 0); walk down until infeasible.
    for (;;) {
      const double g = 0.5 * hi;
      GammaFeasibility r = level(g);
      if (!r.feasible) {
        lo = g;
        break;
      }
      hi = g;
      best = std::move(r);
      warm = best.P;
    }
  }
  const double final_tol = std::min(0.5 * opts.rel_tol, opts.refine_rel_tol.value_or(0.5 * opts.rel_tol));
  while (hi / lo - 1.0 > final_tol) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    GammaFeasibility r = level(mid);
    if (r.feasible) {
      hi = mid;
      best = std::move(r);
      warm = best.P;
    } else {
      lo = mid;
    }
  }
  out.gamma_star = hi;
  out.gamma_infeasible = lo;
  out.bisection_width = (hi - lo) / hi;
  out.P = best.P;
  LevelGains k = level_gamma_gains(sys, best.P, hi);
  out.Ku = std::move(k.Ku);
  out.Kw = std::move(k.Kw);
  return out;
}

// ---------------------------------------------------------------------------
// Scalar and diagonal closed forms.

/// d^2 (q + r k^2) / (1 - |a + b k|)^2
inline double scalar_robust_objective(double a, double b, double d, double r, double q, double k) {
  const double xi = a + b * k;
  if (!(std::abs(xi) < 1.0)) throw ClosedLoopUnstable("scalar_robust_objective: |a + b k| >= 1");
  if (!(r > 0.0) || q < 0.0) throw InvalidInput("scalar_robust_objective: need r > 0 and q >= 0");
  const double m = 1.0 - std::abs(xi);
  return d * d * (q + r * k * k) / (m * m);
}

inline double scalar_domain_limit(double a, double b, double r) {
  return std::abs(a) * r * (1.0 - std::abs(a)) / (b * b);
}

inline void check_scalar_domain(double a, double b, double r, double q) {
  if (a == 0.0 || b == 0.0 || !(r > 0.0)) throw DomainError("scalar closed form: need a != 0, b != 0, r > 0");
  if (!(std::abs(a) < 1.0)) throw DomainError("scalar closed form: need |a| < 1");
  if (q < 0.0 || !(q < scalar_domain_limit(a, b, r)))
    throw DomainError("scalar closed form: q outside [0, |a| r (1-|a|) / b^2)");
}

inline double scalar_optimal_gain(double a, double b, double r, double q) {
  check_scalar_domain(a, b, r, q);
  const double s = a > 0.0 ? 1.0 : -1.0;
  return -s * b * q / (r * (1.0 - std::abs(a)));
}

inline double scalar_optimal_value(double a, double b, double d, double r, double q) {
  check_scalar_domain(a, b, r, q);
  const double m = 1.0 - std::abs(a);
  return (d * d / (m * m)) * q / (1.0 + b * b * q / (r * m * m));
}

/// Coordinates of a commuting system and a task in a shared basis.
struct DiagonalCoordinates {
  Matrix V;
  Vector a, b, d, r, q;
};

inline DiagonalCoordinates diagonal_coordinates(const LinearSystem& sys, const TaskMatrix& Q) {
  if (!is_commuting(sys)) throw DomainError("system matrices do not commute");
  for (const Matrix* m : {&sys.A(), &sys.B(), &sys.D(), &sys.R()})
    if ((Q.Q() * *m - *m * Q.Q()).norm() > 1e-8) throw DomainError("task is not diagonal in the shared basis");
  DiagonalCoordinates c;
  c.V = shared_eigenbasis({&sys.A(), &sys.B(), &sys.D(), &sys.R(), &Q.Q()});
  c.a = coordinates_in(c.V, sys.A());
  c.b = coordinates_in(c.V, sys.B());
  c.d = coordinates_in(c.V, sys.D());
  c.r = coordinates_in(c.V, sys.R());
  c.q = coordinates_in(c.V, Q.Q()).cwiseMax(0.0);
  return c;
}

/// V diag(k*_j(q_j)) V'
inline Matrix stacked_controller(const LinearSystem& sys, const TaskMatrix& Q) {
  const DiagonalCoordinates c = diagonal_coordinates(sys, Q);
  Vector k(sys.dim());
  for (int j = 0; j < sys.dim(); ++j) {
    try {
      k(j) = scalar_optimal_gain(c.a(j), c.b(j), c.r(j), c.q(j));
    } catch (const DomainError& e) {
      throw DomainError("coordinate " + std::to_string(j + 1) + ": " + e.what());
    }
  }
  return c.V * k.asDiagonal() * c.V.transpose();
}

namespace detail {

inline void require_decay(const Matrix& Acl) {
  // ||Acl^(2^20)|| < 1 only if the spectral radius is below one up to a
  // vanishing margin.
  Matrix p = Acl;
  for (int i = 0; i < 20; ++i) {
    p = p * p;
    const double nrm = p.norm();
    if (nrm < 1e-12) return;
    if (!std::isfinite(nrm) || nrm > 1e12) break;
  }
  if (!(p.norm() < 1.0)) throw ClosedLoopUnstable("closed loop A + B K does not decay");
}

// Cost-to-energy ratio of the response to w_t = v s_t for t < horizon,
// followed by a free tail until the state has died out.
inline double sinusoid_ratio(const Matrix& Acl, const Matrix& D, const Matrix& M, const Vector& v, double omega,
                             int horizon) {
  const Eigen::Index n = Acl.rows();
  Vector x = Vector::Zero(n), Dv = D * v;
  double cost = 0.0, energy = 0.0;
  const double vv = v.squaredNorm();
  for (int t = 0; t < horizon; ++t) {
    const double s = std::cos(omega * t);
    cost += x.dot(M * x);
    energy += s * s * vv;
    x = Acl * x + s * Dv;
  }
  for (int t = 0; t < 10 * horizon; ++t) {
    const double c = x.dot(M * x);
    cost += c;
    if (x.squaredNorm() < 1e-300 || c <= 1e-18 * cost) break;
    x = Acl * x;
  }
  return energy > 0.0 ? cost / energy : 0.0;
}

}  // namespace detail

/// Largest observed cost/energy ratio over truncated sinusoidal disturbances.
/// Always a lower bound on the true worst-case ratio.
inline double worst_case_ratio_oracle(const LinearSystem& sys, const Matrix& K, const TaskMatrix& Q,
                                      int horizon = 10000, std::uint64_t seed = 0) {
  if (horizon < 1000) throw InvalidInput("worst_case_ratio_oracle: horizon must be >= 1000");
  const int n = sys.dim();
  const Matrix Acl = sys.A() + sys.B() * K;
  detail::require_decay(Acl);
  const Matrix M = Q.Q() + K.transpose() * sys.R() * K;
  double best = 0.0;
  if (is_commuting(sys)) {
    const Matrix V = shared_eigenbasis(sys);
    for (int j = 0; j < n; ++j)
      for (double omega : {0.0, M_PI})
        best = std::max(best, detail::sinusoid_ratio(Acl, sys.D(), M, V.col(j), omega, horizon));
    return best;
  }
  Rng rng(seed);
  std::vector<Vector> dirs;
  for (int j = 0; j < n; ++j) dirs.push_back(Vector::Unit(n, j));
  for (int j = 0; j < 2 * n; ++j) {
    Vector v = gaussian_matrix(n, 1, rng).col(0);
    dirs.push_back(v / v.norm());
  }
  for (const Vector& v : dirs)
    for (int f = 0; f < 64; ++f)
      best = std::max(best, detail::sinusoid_ratio(Acl, sys.D(), M, v, M_PI * f / 63.0, horizon));
  return best;
}

}  // namespace safegen
