#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>

#include "slbfgs/dense_kernels.hpp"
#include "slbfgs/known_hessian.hpp"
#include "slbfgs/qn_history.hpp"
#include "slbfgs/types.hpp"

// Compact representation of the Minus-form structured update. With history
// pairs (S, U), initialization B0 and the split S^T U = L + R (strictly lower
// plus upper), the full approximation is
//   B = B0 - [B0 S, U] [[S^T B0 S, L], [L^T, -D]]^{-1} [S^T B0; U^T]
// and its inverse applies through triangular solves with R:
//   H = H0 + [S, H0 U] [[T^T (D + U^T H0 U) T, -T^T], [-T, 0]] [S^T; U^T H0]
// with T = R^{-1} realized by tri_solve_upper, H0 = B0^{-1}.

namespace slbfgs {

/// State of the Minus representation for one solver run. Supports a scalar
/// initialization B0 = sigma I and an operator initialization
/// B0 = sigma I + K0 with K0 frozen at the starting point. The inverse-apply
/// cache H0 U is maintained incrementally when sigma is unchanged and rebuilt
/// when it varies. Single owner; not safe for concurrent mutation.
class MinusState {
 public:
  /// Scalar initialization B0 = sigma I, sigma > 0.
  MinusState(const QnHistory* history, double sigma)
      : hist_(history), sigma_(sigma) {
    check_sigma(sigma);
  }

  /// Operator initialization B0 = sigma I + K0. Throws InitNotPD when the
  /// shifted operator is not positive definite.
  MinusState(const QnHistory* history, double sigma, std::shared_ptr<const KnownHessianOp> k0)
      : hist_(history), sigma_(sigma), k0_(std::move(k0)) {
    check_sigma(sigma);
    probe_pd();
  }

  double sigma() const { return sigma_; }
  bool has_operator() const { return k0_ != nullptr; }
  const QnHistory& history() const { return *hist_; }

  /// Number of B0 solves performed so far (cache refreshes included).
  std::uint64_t solve_count() const { return solves_; }

  /// Changes sigma. For the operator initialization the new shifted operator
  /// is probed (InitNotPD on failure) and the H0 U cache is invalidated.
  void set_sigma(double sigma) {
    check_sigma(sigma);
    if (sigma == sigma_) return;
    sigma_ = sigma;
    if (k0_) probe_pd();
  }

  /// B x for the full approximation B = A + K at the current iterate.
  /// Cost O(nm) plus the B0 products and an O(m^3) middle solve.
  Vector apply_B(const Vector& x) const {
    check_dim(x);
    const Index j = hist_->size();
    Vector b0x = apply_B0(x);
    if (j == 0) return b0x;
    const Matrix& S = hist_->S();
    const Matrix& U = hist_->U();
    const Matrix b0s = b0_times(S);
    Vector rhs(2 * j);
    rhs.head(j) = b0s.transpose() * x;
    rhs.tail(j) = U.transpose() * x;
    const Matrix L = hist_->l_u();
    Matrix M(2 * j, 2 * j);
    M.topLeftCorner(j, j) = S.transpose() * b0s;
    M.topRightCorner(j, j) = L;
    M.bottomLeftCorner(j, j) = L.transpose();
    M.bottomRightCorner(j, j) = Matrix((-hist_->d_u()).asDiagonal());
    const Vector w = dense::sym_solve(M, rhs);
    return b0x - apply_B0(S * w.head(j)) - U * w.tail(j);
  }

  /// Search direction p = -H g for the scalar initialization, computed with
  /// two triangular solves and no B0 solve. Cost O(n(4m + 1) + 3m^2).
  Vector search_direction_scalar(const Vector& g) const {
    if (k0_)
      throw Error("search_direction_scalar: state uses an operator initialization");
    check_dim(g);
    const Index j = hist_->size();
    if (j == 0) return Vector(-g / sigma_);
    const Matrix& S = hist_->S();
    const Matrix& U = hist_->U();
    const Matrix R = hist_->r_u();
    const Vector a = S.transpose() * g;
    const Vector b = U.transpose() * g;
    const Vector t = dense::tri_solve_upper(R, a);
    const Vector inner =
        hist_->d_u().cwiseProduct(t) + (hist_->UTU() * t) / sigma_ - b / sigma_;
    const Vector w1 = dense::tri_solve_upper(R, inner, /*transpose=*/true);
    const Vector w2 = -t / sigma_;
    return Vector(-g / sigma_ - S * w1 - U * w2);
  }

  /// Search direction p = -H g for either initialization via the inverse
  /// compact form; exactly one fresh B0 solve when the H0 U cache is current.
  Vector search_direction_general(const Vector& g) {
    check_dim(g);
    sync_cache();
    Vector h0g = solve_B0(g);
    const Index j = hist_->size();
    if (j == 0) return Vector(-h0g);
    const Matrix& S = hist_->S();
    const Matrix& U = hist_->U();
    const Matrix R = hist_->r_u();
    const Vector a = S.transpose() * g;
    const Vector b = U.transpose() * h0g;
    const Vector t = dense::tri_solve_upper(R, a);
    const Vector inner = hist_->d_u().cwiseProduct(t) + U.transpose() * (h0u_ * t) - b;
    const Vector w1 = dense::tri_solve_upper(R, inner, /*transpose=*/true);
    return Vector(-h0g - S * w1 + h0u_ * t);
  }

  /// Dispatches to the scalar fast path when no operator is set.
  Vector search_direction(const Vector& g) {
    return k0_ ? search_direction_general(g) : search_direction_scalar(g);
  }

 private:
  static void check_sigma(double sigma) {
    if (!(sigma > 0.0))
      throw InitNotPD("MinusState: sigma must be positive");
  }

  void check_dim(const Vector& x) const {
    if (x.size() != hist_->dim())
      throw DimensionMismatch("MinusState: vector length does not match history dimension");
  }

  void probe_pd() const {
    if (!k0_->shifted_positive_definite(sigma_))
      throw InitNotPD("MinusState: sigma I + K0 is not positive definite");
  }

  Vector apply_B0(const Vector& x) const {
    return k0_ ? Vector(sigma_ * x + k0_->apply(x)) : Vector(sigma_ * x);
  }

  Matrix b0_times(const Matrix& X) const {
    if (!k0_) return sigma_ * X;
    Matrix out(X.rows(), X.cols());
    for (Index c = 0; c < X.cols(); ++c) out.col(c) = sigma_ * X.col(c) + k0_->apply(X.col(c));
    return out;
  }

  Vector solve_B0(const Vector& rhs) {
    ++solves_;
    return k0_ ? k0_->solve_shifted(sigma_, rhs) : Vector(rhs / sigma_);
  }

  /// Brings the H0 U cache up to date. When sigma is unchanged and exactly one
  /// pair arrived since the last sync, only the newest column is solved;
  /// otherwise all columns are rebuilt.
  void sync_cache() {
    if (!k0_) return;
    const Index j = hist_->size();
    const std::uint64_t version = hist_->version();
    const bool sigma_same = cache_sigma_ == sigma_;
    if (cache_valid_ && sigma_same && version == cache_version_) return;
    const Matrix& U = hist_->U();
    if (cache_valid_ && sigma_same && version == cache_version_ + 1 && j >= cache_size_) {
      h0u_ = col_update(h0u_, solve_B0(U.col(j - 1)), hist_->memory());
    } else {
      h0u_.resize(hist_->dim(), j);
      for (Index c = 0; c < j; ++c) h0u_.col(c) = solve_B0(U.col(c));
    }
    cache_valid_ = true;
    cache_sigma_ = sigma_;
    cache_version_ = version;
    cache_size_ = j;
  }

  const QnHistory* hist_;
  double sigma_;
  std::shared_ptr<const KnownHessianOp> k0_;
  Matrix h0u_;
  bool cache_valid_ = false;
  double cache_sigma_ = 0.0;
  std::uint64_t cache_version_ = 0;
  Index cache_size_ = 0;
  std::uint64_t solves_ = 0;
};

}  // namespace slbfgs
