#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "slbfgs/types.hpp"

// Small dense kernels used by the compact quasi-Newton representations. The
// matrices involved are of order O(2m) for memory m, so unblocked algorithms
// are appropriate. All functions are pure and safe to call concurrently.

namespace slbfgs::dense {

/// Relative tolerance below which a pivot or diagonal entry counts as zero.
inline constexpr double kSingularTol = 1e-14;

namespace detail {

inline void check_square(const Matrix& A, const char* name) {
  if (A.rows() != A.cols())
    throw DimensionMismatch(std::string(name) + ": matrix must be square, got " +
                            std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
}

inline double max_abs_diag(const Matrix& R) {
  return R.rows() == 0 ? 0.0 : R.diagonal().cwiseAbs().maxCoeff();
}

inline void check_triangular_diag(const Matrix& R) {
  const double scale = max_abs_diag(R);
  const double tol = kSingularTol * scale;
  for (Index i = 0; i < R.rows(); ++i) {
    const double d = std::abs(R(i, i));
    if (!(d > tol) || !std::isfinite(d))
      throw SingularTriangular("tri_solve_upper: diagonal entry " + std::to_string(i) +
                               " is below tolerance");
  }
}

}  // namespace detail

/// Solves R X = B (or R^T X = B when transpose is set) where R is upper
/// triangular; only the upper triangle of R is referenced. Throws
/// SingularTriangular when a diagonal entry falls below kSingularTol times the
/// largest diagonal magnitude.
inline Matrix tri_solve_upper(const Matrix& R, const Matrix& B, bool transpose = false) {
  detail::check_square(R, "tri_solve_upper");
  if (R.rows() != B.rows())
    throw DimensionMismatch("tri_solve_upper: R is " + std::to_string(R.rows()) +
                            "x" + std::to_string(R.cols()) + " but B has " +
                            std::to_string(B.rows()) + " rows");
  detail::check_triangular_diag(R);
  const auto upper = R.triangularView<Eigen::Upper>();
  return transpose ? Matrix(upper.transpose().solve(B)) : Matrix(upper.solve(B));
}

inline Vector tri_solve_upper(const Matrix& R, const Vector& b, bool transpose = false) {
  return Vector(tri_solve_upper(R, Matrix(b), transpose));
}

/// Solves A X = B for symmetric (possibly indefinite) A via LU with partial
/// pivoting; only the shape of A is assumed, symmetry is not exploited. Throws
/// SingularMiddleMatrix when the factorization exposes a pivot below
/// kSingularTol times the infinity norm of A.
inline Matrix sym_solve(const Matrix& A, const Matrix& B) {
  detail::check_square(A, "sym_solve");
  if (A.rows() != B.rows())
    throw DimensionMismatch("sym_solve: A is " + std::to_string(A.rows()) + "x" +
                            std::to_string(A.cols()) + " but B has " +
                            std::to_string(B.rows()) + " rows");
  if (A.rows() == 0) return Matrix(0, B.cols());
  const double anorm = A.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::PartialPivLU<Matrix> lu(A);
  const double tol = kSingularTol * anorm;
  const Vector piv = lu.matrixLU().diagonal();
  for (Index i = 0; i < piv.size(); ++i) {
    if (!(std::abs(piv(i)) > tol) || !std::isfinite(piv(i)))
      throw SingularMiddleMatrix("sym_solve: matrix is singular to working precision");
  }
  return lu.solve(B);
}

inline Vector sym_solve(const Matrix& A, const Vector& b) {
  return Vector(sym_solve(A, Matrix(b)));
}

/// Returns true iff symmetric A is positive definite, decided by an unblocked
/// Cholesky factorization whose pivots must all exceed pd_tol. Only the lower
/// triangle of A is referenced. pd_tol = 0 means strict numerical success.
inline bool is_positive_definite(const Matrix& A, double pd_tol = 0.0) {
  detail::check_square(A, "is_positive_definite");
  const Index n = A.rows();
  Matrix L = A.triangularView<Eigen::Lower>();
  for (Index j = 0; j < n; ++j) {
    double pivot = L(j, j);
    for (Index k = 0; k < j; ++k) pivot -= L(j, k) * L(j, k);
    if (!(pivot > pd_tol) || !std::isfinite(pivot)) return false;
    const double ljj = std::sqrt(pivot);
    L(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      double v = L(i, j);
      for (Index k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = v / ljj;
    }
  }
  return true;
}

}  // namespace slbfgs::dense
