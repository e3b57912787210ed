#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <vector>

#include "safegen/linalg.hpp"

namespace safegen {

/// Spectral quantities the bounds are written in.
struct SystemNorms {
  double A = 0.0;
  double B = 0.0;
  double D = 0.0;
  double Rinv = 0.0;
};

/// x_{t+1} = A x_t + B u_t + D w_t with action weight R.
class LinearSystem {
 public:
  LinearSystem(Matrix A, Matrix B, Matrix D, Matrix R)
      : A_(std::move(A)), B_(std::move(B)), D_(std::move(D)), R_(std::move(R)) {
    const Eigen::Index n = A_.rows();
    if (n < 1) throw InvalidInput("LinearSystem: empty state");
    for (const Matrix* m : {&A_, &B_, &D_, &R_}) {
      require_finite(*m, "LinearSystem");
      if (m->rows() != n || m->cols() != n) throw InvalidInput("LinearSystem: all matrices must be dim x dim");
    }
    if (!is_symmetric(R_)) throw InvalidInput("LinearSystem: R must be symmetric");
    R_ = symmetrize(R_);
    const SymEig r_eig = sym_eig(R_);
    if (!(r_eig.eigenvalues(0) > 0.0)) throw InvalidInput("LinearSystem: R must be positive definite");
    norms_.A = spectral_norm(A_);
    norms_.B = spectral_norm(B_);
    norms_.D = spectral_norm(D_);
    norms_.Rinv = 1.0 / r_eig.eigenvalues(0);
    if (!(norms_.A > 0.0 && norms_.A < 1.0)) throw InvalidInput("LinearSystem: need 0 < ||A|| < 1");
    if (!(norms_.B > 0.0)) throw InvalidInput("LinearSystem: B must be nonzero");
    R_inv_ = r_eig.basis * r_eig.eigenvalues.cwiseInverse().asDiagonal() * r_eig.basis.transpose();
  }

  static LinearSystem scalar(double a, double b, double d, double r) {
    return LinearSystem(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), Matrix::Constant(1, 1, d),
                        Matrix::Constant(1, 1, r));
  }

  int dim() const { return static_cast<int>(A_.rows()); }
  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& D() const { return D_; }
  const Matrix& R() const { return R_; }
  const Matrix& R_inverse() const { return R_inv_; }
  const SystemNorms& norms() const { return norms_; }

 private:
  Matrix A_, B_, D_, R_, R_inv_;
  SystemNorms norms_;
};

/// State-cost matrix: symmetric PSD with Frobenius norm at most one.
class TaskMatrix {
 public:
  explicit TaskMatrix(const Matrix& Q) {
    require_finite(Q, "TaskMatrix");
    require_square(Q, "TaskMatrix");
    if (!is_symmetric(Q)) throw InvalidInput("TaskMatrix: Q must be symmetric");
    Q_ = symmetrize(Q);
    if (min_eigenvalue(Q_) < -1e-10) throw InvalidInput("TaskMatrix: Q must be PSD");
    if (Q_.norm() > 1.0 + 1e-10) throw InvalidInput("TaskMatrix: ||Q||_F must be <= 1");
  }
  static TaskMatrix scalar(double q) { return TaskMatrix(Matrix::Constant(1, 1, q)); }
  static TaskMatrix zero(int dim) { return TaskMatrix(Matrix::Zero(dim, dim)); }

  const Matrix& Q() const { return Q_; }
  int dim() const { return static_cast<int>(Q_.rows()); }

 private:
  Matrix Q_;
};

/// Largest commutator or asymmetry residual among A, B, D, R.
inline double commuting_residual(const LinearSystem& sys) {
  const Matrix* ms[] = {&sys.A(), &sys.B(), &sys.D(), &sys.R()};
  double worst = 0.0;
  for (const Matrix* m : ms) worst = std::max(worst, (*m - m->transpose()).norm());
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) worst = std::max(worst, (*ms[i] * *ms[j] - *ms[j] * *ms[i]).norm());
  return worst;
}

inline bool is_commuting(const LinearSystem& sys, double tol = 1e-8) { return commuting_residual(sys) <= tol; }

/// Orthogonal basis diagonalizing a family of commuting symmetric matrices.
/// Uses a fixed irrational combination so repeated eigenvalues of one member
/// do not leave the basis ambiguous for the others.
inline Matrix shared_eigenbasis(std::initializer_list<const Matrix*> family) {
  static constexpr double weights[] = {1.0, 1.4142135623730951, 1.7320508075688772, 3.141592653589793,
                                       2.718281828459045, 0.5772156649015329};
  Matrix combo;
  int k = 0;
  for (const Matrix* m : family) {
    const double w = weights[k % 6] * (1.0 + 0.1234567 * (k / 6));
    if (k == 0)
      combo = w * symmetrize(*m);
    else
      combo += w * symmetrize(*m);
    ++k;
  }
  // Canonical column order and sign: each column is keyed by its largest
  // entry's row and made positive there, so diagonal families give I.
  const Matrix E = detail::jacobi_eig(combo).basis;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> key;
  for (Eigen::Index c = 0; c < E.cols(); ++c) {
    Eigen::Index row = 0;
    E.col(c).cwiseAbs().maxCoeff(&row);
    key.emplace_back(row, c);
  }
  std::stable_sort(key.begin(), key.end());
  Matrix V(E.rows(), E.cols());
  for (Eigen::Index c = 0; c < E.cols(); ++c) {
    const auto [row, src] = key[static_cast<size_t>(c)];
    V.col(c) = E(row, src) < 0.0 ? Vector(-E.col(src)) : Vector(E.col(src));
  }
  return V;
}

inline Matrix shared_eigenbasis(const LinearSystem& sys) {
  return shared_eigenbasis({&sys.A(), &sys.B(), &sys.D(), &sys.R()});
}

/// Diagonal of V^T M V.
inline Vector coordinates_in(const Matrix& V, const Matrix& M) { return (V.transpose() * M * V).diagonal(); }

}  // namespace safegen
