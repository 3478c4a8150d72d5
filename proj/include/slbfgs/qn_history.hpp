#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>

#include "slbfgs/types.hpp"

// Bounded storage of quasi-Newton pair history together with the small cross
// products the compact representations consume. Maintenance follows the
// column-append / bordered-product scheme: each accepted pair costs O(mn)
// multiplications and no product is ever recomputed from scratch.

namespace slbfgs {

/// Appends column c to M; once M holds m columns the oldest (first) column is
/// dropped so the result never exceeds m columns.
inline Matrix col_update(const Matrix& M, const Vector& c, Index m) {
  if (M.rows() != c.size() && M.cols() > 0)
    throw DimensionMismatch("col_update: column length " + std::to_string(c.size()) +
                            " does not match matrix rows " + std::to_string(M.rows()));
  if (m < 1) throw DimensionMismatch("col_update: capacity must be >= 1");
  const Index j = M.cols();
  const Index keep = j < m ? j : m - 1;
  Matrix out(c.size(), keep + 1);
  out.leftCols(keep) = M.rightCols(keep);
  out.col(keep) = c;
  return out;
}

/// Borders the product P = A^T B after A and B receive columns a and b:
/// the new last column is A^T b, the new last row is a^T B, and the corner is
/// a^T b. At capacity (P already m x m) the first row and column are dropped
/// and the border products use A and B without their first columns. Passing
/// nullptr for A (or B) stands for a zero matrix: the corresponding border is
/// written as zeros and no product with it is formed.
inline Matrix prod_update(const Matrix& P, const Matrix* A, const Matrix* B,
                          const Vector& a, const Vector& b, Index m) {
  if (P.rows() != P.cols())
    throw DimensionMismatch("prod_update: P must be square");
  if (m < 1) throw DimensionMismatch("prod_update: capacity must be >= 1");
  const Index j = P.cols();
  const Index keep = j < m ? j : m - 1;
  if (A && A->cols() != j)
    throw DimensionMismatch("prod_update: A has " + std::to_string(A->cols()) +
                            " columns, expected " + std::to_string(j));
  if (B && B->cols() != j)
    throw DimensionMismatch("prod_update: B has " + std::to_string(B->cols()) +
                            " columns, expected " + std::to_string(j));
  Matrix out(keep + 1, keep + 1);
  out.topLeftCorner(keep, keep) = P.bottomRightCorner(keep, keep);
  if (A)
    out.col(keep).head(keep) = A->rightCols(keep).transpose() * b;
  else
    out.col(keep).head(keep).setZero();
  if (B)
    out.row(keep).head(keep) = a.transpose() * B->rightCols(keep);
  else
    out.row(keep).head(keep).setZero();
  out(keep, keep) = a.dot(b);
  return out;
}

/// History of structured quasi-Newton pairs (s, u) and optionally v, capped at
/// m pairs, with incrementally maintained cross products S^T U, S^T S, U^T U
/// and (when v is stored) S^T V. Columns are ordered oldest to newest. Pairs
/// whose curvature s^T u falls at or below curvature_tol are rejected. Single
/// owner; not safe for concurrent mutation.
class QnHistory {
 public:
  /// n: problem dimension, m: maximum stored pairs, with_v: also store the
  /// v vectors and S^T V (needed by the Plus representation only).
  QnHistory(Index n, Index m, bool with_v, double curvature_rel_tol = 1e-12)
      : n_(n), m_(m), with_v_(with_v), curvature_rel_tol_(curvature_rel_tol),
        S_(n, 0), U_(n, 0), V_(n, 0),
        STU_(0, 0), STS_(0, 0), UTU_(0, 0), STV_(0, 0) {
    if (n < 1) throw DimensionMismatch("QnHistory: dimension must be >= 1");
    if (m < 1) throw DimensionMismatch("QnHistory: memory must be >= 1");
  }

  Index dim() const { return n_; }
  Index memory() const { return m_; }
  Index size() const { return S_.cols(); }
  bool stores_v() const { return with_v_; }

  /// Increments whenever the stored history changes.
  std::uint64_t version() const { return version_; }

  /// Total multiplications spent maintaining the cross products.
  std::uint64_t mult_count() const { return mult_count_; }

  /// Curvature threshold for a candidate pair: curvature_rel_tol * |s| * |u|.
  double curvature_tol(const Vector& s, const Vector& u) const {
    return curvature_rel_tol_ * s.norm() * u.norm();
  }

  bool accepts(const Vector& s, const Vector& u) const {
    return s.dot(u) > curvature_tol(s, u);
  }

  /// Stores a new pair. Throws CurvatureReject (leaving the history unchanged)
  /// when s^T u is at or below the curvature threshold.
  void push(const Vector& s, const Vector& u) {
    if (with_v_) throw DimensionMismatch("QnHistory::push: v required when v storage is active");
    push_impl(s, u, nullptr);
  }

  void push(const Vector& s, const Vector& u, const Vector& v) {
    if (!with_v_) throw DimensionMismatch("QnHistory::push: history was built without v storage");
    push_impl(s, u, &v);
  }

  /// Removes the oldest pair; no-op on an empty history.
  void drop_oldest() {
    const Index j = size();
    if (j == 0) return;
    S_ = S_.rightCols(j - 1).eval();
    U_ = U_.rightCols(j - 1).eval();
    STU_ = STU_.bottomRightCorner(j - 1, j - 1).eval();
    STS_ = STS_.bottomRightCorner(j - 1, j - 1).eval();
    UTU_ = UTU_.bottomRightCorner(j - 1, j - 1).eval();
    if (with_v_) {
      V_ = V_.rightCols(j - 1).eval();
      STV_ = STV_.bottomRightCorner(j - 1, j - 1).eval();
    }
    ++version_;
  }

  const Matrix& S() const { return S_; }
  const Matrix& U() const { return U_; }
  const Matrix& V() const {
    require_v("V");
    return V_;
  }
  const Matrix& STU() const { return STU_; }
  const Matrix& STS() const { return STS_; }
  const Matrix& UTU() const { return UTU_; }
  const Matrix& STV() const {
    require_v("STV");
    return STV_;
  }

  /// Upper triangle (including diagonal) of S^T U.
  Matrix r_u() const { return STU_.triangularView<Eigen::Upper>(); }
  /// Strictly lower triangle of S^T U.
  Matrix l_u() const { return STU_.triangularView<Eigen::StrictlyLower>(); }
  /// Diagonal of S^T U; entries are the stored curvatures, all positive.
  Vector d_u() const { return STU_.diagonal(); }
  /// Strictly lower triangle of S^T V.
  Matrix l_v() const {
    require_v("l_v");
    return STV_.triangularView<Eigen::StrictlyLower>();
  }
  /// Diagonal of S^T V.
  Vector d_v() const {
    require_v("d_v");
    return STV_.diagonal();
  }

  /// Writes every stored matrix in a plain-text format: one block per matrix,
  /// a header line "name rows cols" followed by rows of space-separated
  /// values with 17 significant digits.
  void dump(std::ostream& os) const {
    os << "qn_history " << n_ << ' ' << m_ << ' ' << size() << ' '
       << (with_v_ ? 1 : 0) << '\n';
    dump_matrix(os, "S", S_);
    dump_matrix(os, "U", U_);
    dump_matrix(os, "STU", STU_);
    dump_matrix(os, "STS", STS_);
    dump_matrix(os, "UTU", UTU_);
    if (with_v_) {
      dump_matrix(os, "V", V_);
      dump_matrix(os, "STV", STV_);
    }
  }

 private:
  void require_v(const char* what) const {
    if (!with_v_)
      throw Error(std::string(what) + ": history was built without v storage");
  }

  void push_impl(const Vector& s, const Vector& u, const Vector* v) {
    if (s.size() != n_ || u.size() != n_ || (v && v->size() != n_))
      throw DimensionMismatch("QnHistory::push: vector length does not match dimension " +
                              std::to_string(n_));
    const double stu = s.dot(u);
    mult_count_ += static_cast<std::uint64_t>(n_);
    if (!(stu > curvature_tol(s, u)))
      throw CurvatureReject("QnHistory::push: s^T u = " + std::to_string(stu) +
                            " is below the curvature threshold");
    const Index j = size();
    const Index jb = j < m_ ? j : m_ - 1;  // border length of each product
    STU_ = prod_update(STU_, &S_, &U_, s, u, m_);
    STS_ = prod_update(STS_, &S_, &S_, s, s, m_);
    UTU_ = prod_update(UTU_, &U_, &U_, u, u, m_);
    mult_count_ += static_cast<std::uint64_t>(3 * (2 * jb * n_ + n_));
    if (v) {
      STV_ = prod_update(STV_, &S_, &V_, s, *v, m_);
      mult_count_ += static_cast<std::uint64_t>(2 * jb * n_ + n_);
    }
    S_ = col_update(S_, s, m_);
    U_ = col_update(U_, u, m_);
    if (v) V_ = col_update(V_, *v, m_);
    ++version_;
  }

  static void dump_matrix(std::ostream& os, const char* name, const Matrix& M) {
    os << name << ' ' << M.rows() << ' ' << M.cols() << '\n';
    char buf[32];
    for (Index i = 0; i < M.rows(); ++i) {
      for (Index c = 0; c < M.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", M(i, c));
        os << buf << (c + 1 == M.cols() ? "" : " ");
      }
      os << '\n';
    }
  }

  Index n_;
  Index m_;
  bool with_v_;
  double curvature_rel_tol_;
  Matrix S_, U_, V_;
  Matrix STU_, STS_, UTU_, STV_;
  std::uint64_t version_ = 0;
  std::uint64_t mult_count_ = 0;
};

}  // namespace slbfgs
