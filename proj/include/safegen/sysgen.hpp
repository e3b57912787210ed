#pragma once

// Random systems and task batches, assumption checks, alignment factor.

#include <optional>
#include <vector>

#include "safegen/hinf.hpp"

namespace safegen {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AlignmentReport {
  double alpha = 0.0;
  std::vector<int> witnesses;  // zero-based coordinate indices
  bool regular = false;
  double witness_lower_bound = 0.0;  // 0 when no regular witness exists
  Vector per_index;                  // alpha_j
};

struct AssumptionReport {
  bool stability_margin = false;
  double stability_threshold = 0.0;
  double stability_slack = 0.0;  // threshold - ||A||
  double contraction = 0.0;
  bool commuting = false;
  double commuting_residual = 0.0;
  std::optional<bool> regular;  // empty when the system does not commute
  std::optional<AlignmentReport> alignment;
};

inline constexpr double kRegularityTol = 1e-10;

inline AlignmentReport alignment_factor(const LinearSystem& sys) {
  if (!is_commuting(sys)) throw InvalidInput("alignment_factor: system matrices do not commute");
  const Matrix V = shared_eigenbasis(sys);
  const Vector a = coordinates_in(V, sys.A()), b = coordinates_in(V, sys.B()), d = coordinates_in(V, sys.D()),
               r = coordinates_in(V, sys.R());
  const SystemNorms& n = sys.norms();
  const double rmin = 1.0 / n.Rinv;
  AlignmentReport rep;
  rep.per_index.resize(sys.dim());
  for (int j = 0; j < sys.dim(); ++j) {
    double aj = 1.0;
    if (std::abs(a(j)) < 1.0) aj = std::min(aj, (1.0 - n.A) / (1.0 - std::abs(a(j))));
    aj = std::min(aj, std::abs(b(j)) / n.B);
    aj = std::min(aj, rmin / r(j));
    rep.per_index(j) = std::max(0.0, aj);
  }
  rep.alpha = rep.per_index.maxCoeff();
  for (int j = 0; j < sys.dim(); ++j) {
    if (rep.per_index(j) < rep.alpha - 1e-10) continue;
    rep.witnesses.push_back(j);
    if (std::abs(a(j)) > kRegularityTol && std::abs(d(j)) > kRegularityTol) {
      rep.regular = true;
      rep.witness_lower_bound =
          std::max(rep.witness_lower_bound, std::abs(b(j)) / (r(j) * (1.0 - std::abs(a(j)))));
    }
  }
  return rep;
}

inline AssumptionReport check_assumptions(const LinearSystem& sys) {
  const SystemNorms& n = sys.norms();
  AssumptionReport rep;
  rep.stability_threshold = stability_threshold(n.B, n.Rinv);
  rep.stability_slack = rep.stability_threshold - n.A;
  rep.stability_margin = stability_margin_holds(n);
  rep.contraction = contraction_constant(n);
  rep.commuting_residual = commuting_residual(sys);
  rep.commuting = rep.commuting_residual <= 1e-8;
  if (rep.commuting) {
    rep.alignment = alignment_factor(sys);
    rep.regular = rep.alignment->regular;
  }
  return rep;
}

/// alpha^3 / (||A|| (2 + 4 ||B||^2 ||R^{-1}||)), or empty when any of the
/// three assumptions fails.
inline std::optional<double> separation_lower_coefficient(const LinearSystem& sys) {
  const AssumptionReport rep = check_assumptions(sys);
  if (!rep.stability_margin || !rep.commuting || !rep.regular.value_or(false)) return std::nullopt;
  const SystemNorms& n = sys.norms();
  const double a = rep.alignment->alpha;
  return a * a * a / (n.A * (2.0 + 4.0 * n.B * n.B * n.Rinv));
}

inline double separation_lower_coefficient(double alpha, const SystemNorms& n) {
  return alpha * alpha * alpha / (n.A * (2.0 + 4.0 * n.B * n.B * n.Rinv));
}

namespace detail {

inline Vector gaussian_vector(int n, Rng& rng) { return gaussian_matrix(n, 1, rng).col(0); }

inline Vector rescale_max_abs(Vector v, double target) {
  const double m = v.cwiseAbs().maxCoeff();
  if (!(m > 0.0)) throw GenerationError("degenerate Gaussian draw");
  return v * (target / m);
}

inline Matrix rescale_spectral(const Matrix& m, double target) {
  const double s = spectral_norm(m);
  if (!(s > 0.0)) throw GenerationError("degenerate Gaussian draw");
  return m * (target / s);
}

// R = M M' with lambda_min(R) = 1 / normRinv.
inline Matrix draw_action_weight(int dim, double normRinv, Rng& rng) {
  const Matrix M = gaussian_matrix(dim, dim, rng);
  Matrix R = symmetrize(M * M.transpose());
  const double lmin = min_eigenvalue(R);
  if (!(lmin > 0.0)) throw GenerationError("singular action weight draw");
  return symmetrize(R * ((1.0 / normRinv) / lmin));
}

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(what) + " must be positive");
}

}  // namespace detail

/// Commuting system in a random basis: the eigenbasis of R. Coordinate 1 (the
/// smallest eigenvalue of R) is pushed onto the alignment boundary when the
/// draw misses it.
inline LinearSystem gen_system_commuting(int dim, double normA, double normB, double normD, double normRinv,
                                         double alpha_target, Rng& rng) {
  if (dim < 1) throw InvalidInput("gen_system_commuting: dim must be >= 1");
  detail::require_positive(normA, "normA");
  detail::require_positive(normB, "normB");
  detail::require_positive(normD, "normD");
  detail::require_positive(normRinv, "normRinv");
  if (!(normA < 1.0)) throw InvalidInput("gen_system_commuting: normA must be < 1");
  if (!(alpha_target > 0.0 && alpha_target <= 1.0))
    throw InvalidInput("gen_system_commuting: alpha_target must lie in (0, 1]");
  const double need_a = std::max(0.0, 1.0 - (1.0 - normA) / alpha_target);
  const double need_b = alpha_target * normB;
  if (need_a > normA || need_b > normB) throw GenerationError("gen_system_commuting: alignment target unreachable");
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Matrix R = detail::draw_action_weight(dim, normRinv, rng);
    const SymEig eig = sym_eig(R);
    const Matrix& V = eig.basis;
    Vector la = detail::rescale_max_abs(detail::gaussian_vector(dim, rng), normA);
    Vector lb = detail::rescale_max_abs(detail::gaussian_vector(dim, rng), normB);
    Vector ld = detail::rescale_max_abs(detail::gaussian_vector(dim, rng), normD);
    if (std::abs(la(0)) < need_a) la(0) = (la(0) < 0.0 ? -1.0 : 1.0) * need_a;
    if (std::abs(lb(0)) < need_b) lb(0) = (lb(0) < 0.0 ? -1.0 : 1.0) * need_b;
    const Matrix Vt = V.transpose();
    LinearSystem sys(symmetrize(V * la.asDiagonal() * Vt), symmetrize(V * lb.asDiagonal() * Vt),
                     symmetrize(V * ld.asDiagonal() * Vt), symmetrize(V * eig.eigenvalues.asDiagonal() * Vt));
    if (!is_commuting(sys)) continue;
    const AlignmentReport rep = alignment_factor(sys);
    if (rep.alpha >= alpha_target - 1e-8 && rep.regular) return sys;
  }
  throw GenerationError("gen_system_commuting: no admissible draw in 100 attempts");
}

/// Gaussian A, B, D rescaled to the prescribed spectral norms (||D|| = 1).
inline LinearSystem gen_system_unconstrained(int dim, double normA, double normB, double normRinv, Rng& rng) {
  if (dim < 1) throw InvalidInput("gen_system_unconstrained: dim must be >= 1");
  detail::require_positive(normA, "normA");
  detail::require_positive(normB, "normB");
  detail::require_positive(normRinv, "normRinv");
  const Matrix A = detail::rescale_spectral(gaussian_matrix(dim, dim, rng), normA);
  const Matrix B = detail::rescale_spectral(gaussian_matrix(dim, dim, rng), normB);
  const Matrix D = detail::rescale_spectral(gaussian_matrix(dim, dim, rng), 1.0);
  const Matrix R = detail::draw_action_weight(dim, normRinv, rng);
  return LinearSystem(A, B, D, R);
}

/// ||A|| = ||B|| = 0.5, D = I, R = M M' with ||R||_F uniform in [0.25, 1].
inline LinearSystem gen_system_lq_experiments(int dim, Rng& rng) {
  if (dim < 1) throw InvalidInput("gen_system_lq_experiments: dim must be >= 1");
  const Matrix A = detail::rescale_spectral(gaussian_matrix(dim, dim, rng), 0.5);
  const Matrix B = detail::rescale_spectral(gaussian_matrix(dim, dim, rng), 0.5);
  const Matrix M = gaussian_matrix(dim, dim, rng);
  std::uniform_real_distribution<double> u(0.25, 1.0);
  const double fro = u(rng);
  Matrix R = symmetrize(M * M.transpose());
  R = symmetrize(R * (fro / R.norm()));
  return LinearSystem(A, B, Matrix::Identity(dim, dim), R);
}

struct ActiveIndexTask {
  TaskMatrix Q;
  int active = 0;  // zero-based coordinate
  Vector q;        // coordinates of Q in the shared basis
};

/// Diagonal task with one dominant coordinate: q = q_bar at `active` with
/// q_bar = min(1, |a| r (1-|a|) / b^2) / 2, and a small eta elsewhere, chosen
/// so every other optimal scalar value stays below half of the active one.
inline ActiveIndexTask unique_active_task(const LinearSystem& sys, int active) {
  if (!is_commuting(sys)) throw InvalidInput("unique_active_task: system matrices do not commute");
  if (active < 0 || active >= sys.dim()) throw InvalidInput("unique_active_task: index out of range");
  const Matrix V = shared_eigenbasis(sys);
  const Vector a = coordinates_in(V, sys.A()), b = coordinates_in(V, sys.B()), d = coordinates_in(V, sys.D()),
               r = coordinates_in(V, sys.R());
  const int j = active;
  const double qbar = 0.5 * std::min(1.0, scalar_domain_limit(a(j), b(j), r(j)));
  const double top = scalar_optimal_value(a(j), b(j), d(j), r(j), qbar);
  if (!(top > 0.0)) throw InvalidInput("unique_active_task: active coordinate has no disturbance path");
  double eta = 0.5 / std::sqrt(static_cast<double>(std::max(1, sys.dim() - 1)));
  for (int i = 0; i < sys.dim(); ++i) {
    if (i == j) continue;
    const double m = 1.0 - std::abs(a(i));
    // Gamma*_i(eta) <= d_i^2 eta / (1-|a_i|)^2
    if (d(i) != 0.0) eta = std::min(eta, 0.5 * top * m * m / (d(i) * d(i)));
    if (a(i) != 0.0 && b(i) != 0.0) eta = std::min(eta, 0.5 * scalar_domain_limit(a(i), b(i), r(i)));
  }
  Vector q = Vector::Constant(sys.dim(), eta);
  q(j) = qbar;
  if (q.norm() > 1.0) q(j) = std::sqrt(std::max(0.0, 1.0 - eta * eta * (sys.dim() - 1)));
  return {TaskMatrix(symmetrize(V * q.asDiagonal() * V.transpose())), j, q};
}

namespace detail {

// Eigenvalues >= 0.1 with unit Euclidean norm; the smallest sits at 0.1.
inline Vector constrained_spectrum(int dim, Rng& rng) {
  constexpr double floor = 0.1;
  if (dim == 1) return Vector::Constant(1, 1.0);
  if (dim * floor * floor > 1.0) throw InvalidInput("gen_tasks: dim too large for the eigenvalue floor");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector e(dim);
  for (int i = 0; i < dim; ++i) e(i) = u(rng);
  e.array() -= e.minCoeff();
  if (!(e.squaredNorm() > 0.0)) {
    e.setOnes();
    e(0) = 0.0;
  }
  const double S1 = e.sum(), S2 = e.squaredNorm();
  // |floor + t e|^2 = 1
  const double qa = S2, qb = 2.0 * floor * S1, qc = dim * floor * floor - 1.0;
  const double t = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
  Vector lam = Vector::Constant(dim, floor) + t * e;
  return lam / lam.norm();
}

inline Matrix normalized_gram(int dim, double fro, Rng& rng) {
  const Matrix M = gaussian_matrix(dim, dim, rng);
  const Matrix G = symmetrize(M * M.transpose());
  return symmetrize(G * (fro / G.norm()));
}

}  // namespace detail

/// Three batches: (i) spectrum floor 0.1 with unit norm, (ii) radius in
/// (0, 1], (iii) radius in (0, ||A||].
inline std::vector<TaskMatrix> gen_tasks(int dim, int count_per_batch, double normA, Rng& rng) {
  if (count_per_batch < 1) throw InvalidInput("gen_tasks: count_per_batch must be >= 1");
  if (dim < 1) throw InvalidInput("gen_tasks: dim must be >= 1");
  std::vector<TaskMatrix> out;
  out.reserve(3 * static_cast<size_t>(count_per_batch));
  for (int i = 0; i < count_per_batch; ++i) {
    const Matrix U = random_orthogonal(dim, rng);
    const Vector lam = detail::constrained_spectrum(dim, rng);
    out.emplace_back(symmetrize(U * lam.asDiagonal() * U.transpose()));
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double cap : {1.0, std::min(1.0, normA)}) {
    for (int i = 0; i < count_per_batch; ++i) {
      const double radius = cap * (1.0 - u(rng));  // in (0, cap]
      out.emplace_back(detail::normalized_gram(dim, radius, rng));
    }
  }
  return out;
}

/// Tasks drawn like the action weight of the imitation systems: M M' with
/// Frobenius norm uniform in [0.25, 1].
inline std::vector<TaskMatrix> gen_tasks_lq(int dim, int count, Rng& rng) {
  std::vector<TaskMatrix> out;
  out.reserve(static_cast<size_t>(count));
  std::uniform_real_distribution<double> u(0.25, 1.0);
  for (int i = 0; i < count; ++i) {
    const double fro = u(rng);
    out.emplace_back(detail::normalized_gram(dim, fro, rng));
  }
  return out;
}

}  // namespace safegen
