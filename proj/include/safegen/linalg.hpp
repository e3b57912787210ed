#pragma once

// Dense matrix primitives shared by every other header. Storage and products
// come from Eigen; the symmetric eigensolver is a cyclic Jacobi sweep.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace safegen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a matrix that must be positive definite is not. Carries the
/// smallest eigenvalue that was found.
class DefinitenessError : public std::runtime_error {
 public:
  DefinitenessError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

struct SymEig {
  Matrix basis;        // columns are eigenvectors
  Vector eigenvalues;  // ascending
};

inline constexpr double kSymmetryTol = 1e-10;

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entries");
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw InvalidInput(std::string(what) + ": matrix is not square");
}

inline double frobenius_norm(const Matrix& m) {
  require_finite(m, "frobenius_norm");
  return m.norm();
}

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline bool is_symmetric(const Matrix& m, double tol = kSymmetryTol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

namespace detail {

inline double off_diagonal_mass(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Cyclic Jacobi on an already symmetric matrix. No validation.
inline SymEig jacobi_eig(Matrix a) {
  const Eigen::Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();
  if (scale > 0.0) {
    const double threshold = 1e-12 * scale;
    int sweep = 0;
    while (off_diagonal_mass(a) > threshold) {
      if (++sweep > 100) throw std::runtime_error("sym_eig: Jacobi sweeps did not converge");
      for (Eigen::Index p = 0; p < n - 1; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          // A <- J^T A J with J the (p,q) rotation [c s; -s c].
          for (Eigen::Index k = 0; k < n; ++k) {
            const double akp = a(k, p), akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (Eigen::Index k = 0; k < n; ++k) {
            const double apk = a(p, k), aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          for (Eigen::Index k = 0; k < n; ++k) {
            const double vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  SymEig out{Matrix(n, n), Vector(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]);
    out.basis.col(k) = v.col(order[k]);
  }
  return out;
}

}  // namespace detail

inline SymEig sym_eig(const Matrix& m) {
  require_finite(m, "sym_eig");
  require_square(m, "sym_eig");
  if (!is_symmetric(m)) throw InvalidInput("sym_eig: input is not symmetric");
  return detail::jacobi_eig(symmetrize(m));
}

inline double min_eigenvalue(const Matrix& m) { return sym_eig(m).eigenvalues(0); }

inline double max_eigenvalue(const Matrix& m) {
  const Vector ev = sym_eig(m).eigenvalues;
  return ev(ev.size() - 1);
}

inline double spectral_norm(const Matrix& m) {
  require_finite(m, "spectral_norm");
  if (m.size() == 0) return 0.0;
  const Vector ev = detail::jacobi_eig(symmetrize(m.transpose() * m)).eigenvalues;
  return std::sqrt(std::max(0.0, ev(ev.size() - 1)));
}

/// Solves M X = RHS for symmetric positive definite M.
inline Matrix solve_spd(const Matrix& m, const Matrix& rhs) {
  require_finite(m, "solve_spd");
  require_finite(rhs, "solve_spd");
  require_square(m, "solve_spd");
  if (rhs.rows() != m.rows()) throw InvalidInput("solve_spd: dimension mismatch");
  if (!is_symmetric(m)) throw InvalidInput("solve_spd: matrix is not symmetric");
  Eigen::LLT<Matrix> llt(symmetrize(m));
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12)) {
    // Slow path: decide on the exact eigenvalue criterion.
    const Vector ev = detail::jacobi_eig(symmetrize(m)).eigenvalues;
    const double top = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    if (!(ev(0) > 1e-12 * top) || llt.info() != Eigen::Success)
      throw DefinitenessError("solve_spd: matrix is not positive definite", ev(0));
  }
  return llt.solve(rhs);
}

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix m(rows, cols);
  // Fill row by row so the draw order matches the row-major convention.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n01(rng);
  return m;
}

/// Haar-distributed orthogonal matrix via QR of a Gaussian matrix with the
/// sign of R's diagonal folded into Q.
inline Matrix random_orthogonal(int dim, Rng& rng) {
  if (dim < 1) throw InvalidInput("random_orthogonal: dim must be >= 1");
  const Matrix g = gaussian_matrix(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

/// Power of a square matrix by repeated squaring.
inline Matrix matrix_power(const Matrix& m, int k) {
  require_square(m, "matrix_power");
  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix base = m;
  while (k > 0) {
    if (k & 1) result = result * base;
    base = base * base;
    k >>= 1;
  }
  return result;
}

/// Flattens in row-major order.
inline Vector flatten_row_major(const Matrix& m) {
  Vector v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(k++) = m(i, j);
  return v;
}

inline Matrix unflatten_row_major(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw InvalidInput("unflatten_row_major: size mismatch");
  Matrix m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v(k++);
  return m;
}

}  // namespace safegen
