#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>

#include "slbfgs/dense_kernels.hpp"
#include "slbfgs/known_hessian.hpp"
#include "slbfgs/qn_history.hpp"
#include "slbfgs/types.hpp"

// Compact representation of the Plus-form structured update. With pairs
// (S, U, V), Q = V + sigma S and the splits S^T U = L_u + R_u,
// S^T V = L_v + R_v, the unknown-block approximation is
//   A = sigma I - [Q, U] M^{-1} [Q^T; U^T],
//   M = [[D_v + L_v + L_v^T + sigma S^T S, L_u], [L_u^T, -D_u]].
// Search directions solve (K + A + delta I) p = -g through the
// Sherman-Morrison-Woodbury identity with Khat = K + (sigma + delta) I:
//   (Khat - Xi M^{-1} Xi^T)^{-1} = Khat^{-1} + Khat^{-1} Xi
//       (M - Xi^T Khat^{-1} Xi)^{-1} Xi^T Khat^{-1},  Xi = [Q, U].

namespace slbfgs {

/// State of the Plus representation at one iterate: the current known-Hessian
/// handle, scalar initialization sigma, and regularization delta. Small
/// factorizations are cached per (history version, sigma, delta). Single
/// owner; not safe for concurrent mutation.
class PlusState {
 public:
  /// history must store v vectors. dense_cap bounds the dimension for which a
  /// dense positive-definiteness fallback is attempted when the operator
  /// cannot probe its shifted form.
  PlusState(const QnHistory* history, std::shared_ptr<const KnownHessianOp> k, double sigma,
            Index dense_cap = 500)
      : hist_(history), k_(std::move(k)), sigma_(sigma), dense_cap_(dense_cap) {
    if (!hist_->stores_v())
      throw DimensionMismatch("PlusState: history must store v vectors");
    if (!(sigma > 0.0)) throw InitNotPD("PlusState: sigma must be positive");
  }

  double sigma() const { return sigma_; }
  double delta() const { return delta_; }
  const KnownHessianOp& known_hessian() const { return *k_; }
  const QnHistory& history() const { return *hist_; }

  /// Points the state at a new iterate: known-Hessian handle and sigma.
  /// Resets delta to zero.
  void refresh(std::shared_ptr<const KnownHessianOp> k, double sigma) {
    if (!(sigma > 0.0)) throw InitNotPD("PlusState: sigma must be positive");
    k_ = std::move(k);
    sigma_ = sigma;
    delta_ = 0.0;
    base_valid_ = false;
    smw_valid_ = false;
  }

  void set_delta(double delta) {
    if (!(delta >= 0.0)) throw Error("PlusState: delta must be nonnegative");
    if (delta != delta_) {
      delta_ = delta;
      smw_valid_ = false;
    }
  }

  /// A x for the current unknown-block approximation. Cost O(nm) plus an
  /// O(m^3) middle solve.
  Vector apply_A(const Vector& x) {
    check_dim(x);
    sync_base();
    const Index j = hist_->size();
    if (j == 0) return Vector(sigma_ * x);
    Vector rhs(2 * j);
    rhs.head(j) = q_.transpose() * x;
    rhs.tail(j) = hist_->U().transpose() * x;
    // middle_ holds D M D; recover the unscaled solution of M w = rhs.
    const Vector w =
        mscale_.cwiseProduct(dense::sym_solve(middle_, Vector(mscale_.cwiseProduct(rhs))));
    return sigma_ * x - q_ * w.head(j) - hist_->U() * w.tail(j);
  }

  /// True iff K + A + delta I is positive definite in the sense usable by the
  /// SMW solve: Khat = K + (sigma + delta) I must be positive definite and the
  /// inertia of the SMW Schur complement must match the inertia of the middle
  /// matrix (an exact equivalence when Khat is definite).
  bool pd_probe() {
    if (!khat_positive_definite()) return false;
    sync_base();
    if (hist_->size() == 0) return true;
    sync_smw();
    const auto schur_inertia = inertia(schur_eig_.eigenvalues());
    const auto middle_inertia = inertia(middle_eig_.eigenvalues());
    if (schur_inertia.zero != 0 || middle_inertia.zero != 0) return false;
    return schur_inertia.positive == middle_inertia.positive;
  }

  /// Leaves delta at zero when the current matrix is already positive
  /// definite, otherwise takes the first power of ten 1, 10, ..., 1e12 that
  /// makes the probe succeed. Throws RegularizationFailed past the cap.
  void ensure_positive_definite() {
    set_delta(0.0);
    if (pd_probe()) return;
    double delta = 1.0;
    for (int i = 0; i <= 12; ++i, delta *= 10.0) {
      set_delta(delta);
      if (pd_probe()) return;
    }
    throw RegularizationFailed("PlusState: no delta up to 1e12 restores positive definiteness");
  }

  /// Cheap regularization guess delta = max(0, (eps - (u + v)^T s) / |s|^2)
  /// from the most recent pair, falling back to the power-of-ten search when
  /// the guess does not restore positive definiteness.
  void ensure_positive_definite_cheap(const Vector& s, const Vector& u, const Vector& v,
                                      double eps = 1e-8) {
    const double ss = s.squaredNorm();
    if (ss > 0.0) {
      const double guess = std::max(0.0, (eps - (u + v).dot(s)) / ss);
      set_delta(guess);
      if (pd_probe()) return;
    }
    ensure_positive_definite();
  }

  /// Solves (K + A + delta I) p = -g via the SMW identity. Preconditions:
  /// Khat positive definite (ensure_positive_definite ran). Throws
  /// SingularMiddleMatrix when the Schur complement is singular.
  Vector solve(const Vector& g) {
    check_dim(g);
    sync_base();
    const double shift = sigma_ + delta_;
    const Index j = hist_->size();
    if (j == 0) return Vector(-k_->solve_shifted(shift, g));
    sync_smw();
    const Vector z = k_->solve_shifted(shift, g);
    Vector rhs(2 * j);
    rhs.head(j) = q_.transpose() * z;
    rhs.tail(j) = hist_->U().transpose() * z;
    const Vector w = schur_solve(rhs);
    return Vector(-(z + qhat_ * w.head(j) + uhat_ * w.tail(j)));
  }

 private:
  struct Inertia {
    Index positive = 0;
    Index negative = 0;
    Index zero = 0;
  };

  void check_dim(const Vector& x) const {
    if (x.size() != hist_->dim())
      throw DimensionMismatch("PlusState: vector length does not match history dimension");
  }

  static Inertia inertia(const Vector& eigenvalues) {
    Inertia out;
    const double scale = eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * scale;
    for (Index i = 0; i < eigenvalues.size(); ++i) {
      if (eigenvalues(i) > tol)
        ++out.positive;
      else if (eigenvalues(i) < -tol)
        ++out.negative;
      else
        ++out.zero;
    }
    return out;
  }

  bool khat_positive_definite() const {
    const double shift = sigma_ + delta_;
    if (k_->can_probe_pd()) return k_->shifted_positive_definite(shift);
    if (hist_->dim() <= dense_cap_) {
      Matrix khat = k_->to_dense();
      khat.diagonal().array() += shift;
      return dense::is_positive_definite(khat);
    }
    return false;
  }

  /// Rebuilds Q and the middle matrix (and its eigendecomposition) for the
  /// current sigma and history. The middle matrix is stored symmetrically
  /// equilibrated as D M D with D = diag(mscale_): stored pairs may differ by
  /// many orders of magnitude near convergence, and the scaling keeps the
  /// eigendecompositions meaningful. Congruence preserves inertia, so the
  /// positive-definiteness probe is unaffected in exact arithmetic.
  void sync_base() {
    const std::uint64_t version = hist_->version();
    if (base_valid_ && base_version_ == version && base_sigma_ == sigma_) return;
    const Index j = hist_->size();
    q_ = hist_->V() + sigma_ * hist_->S();
    middle_.resize(2 * j, 2 * j);
    mscale_.resize(2 * j);
    if (j > 0) {
      const Matrix lv = hist_->l_v();
      const Matrix lu = hist_->l_u();
      middle_.topLeftCorner(j, j) =
          Matrix(hist_->d_v().asDiagonal()) + lv + lv.transpose() + sigma_ * hist_->STS();
      middle_.topRightCorner(j, j) = lu;
      middle_.bottomLeftCorner(j, j) = lu.transpose();
      middle_.bottomRightCorner(j, j) = Matrix((-hist_->d_u()).asDiagonal());
      for (Index i = 0; i < 2 * j; ++i) {
        const double row_max = middle_.row(i).cwiseAbs().maxCoeff();
        mscale_(i) = row_max > 0.0 ? 1.0 / std::sqrt(row_max) : 1.0;
      }
      middle_ = mscale_.asDiagonal() * middle_ * mscale_.asDiagonal();
      middle_eig_.compute(middle_, Eigen::EigenvaluesOnly);
    }
    base_valid_ = true;
    base_version_ = version;
    base_sigma_ = sigma_;
    smw_valid_ = false;
  }

  /// Rebuilds the Khat solves of [Q, U] and the SMW Schur complement with its
  /// eigendecomposition for the current delta.
  void sync_smw() {
    sync_base();
    if (smw_valid_ && smw_delta_ == delta_) return;
    const Index j = hist_->size();
    const double shift = sigma_ + delta_;
    const Index n = hist_->dim();
    qhat_.resize(n, j);
    uhat_.resize(n, j);
    for (Index c = 0; c < j; ++c) {
      qhat_.col(c) = k_->solve_shifted(shift, q_.col(c));
      uhat_.col(c) = k_->solve_shifted(shift, hist_->U().col(c));
    }
    // Assembled under the same congruence scaling as the middle matrix.
    Matrix prod(2 * j, 2 * j);
    prod.topLeftCorner(j, j) = q_.transpose() * qhat_;
    prod.topRightCorner(j, j) = q_.transpose() * uhat_;
    prod.bottomLeftCorner(j, j) = prod.topRightCorner(j, j).transpose();
    prod.bottomRightCorner(j, j) = hist_->U().transpose() * uhat_;
    schur_ = middle_ - mscale_.asDiagonal() * prod * mscale_.asDiagonal();
    schur_eig_.compute(schur_);
    smw_valid_ = true;
    smw_delta_ = delta_;
  }

  Vector schur_solve(const Vector& rhs) const {
    const Vector& lambda = schur_eig_.eigenvalues();
    const double scale = lambda.cwiseAbs().maxCoeff();
    const double tol = dense::kSingularTol * scale;
    for (Index i = 0; i < lambda.size(); ++i)
      if (!(std::abs(lambda(i)) > tol))
        throw SingularMiddleMatrix("PlusState: SMW Schur complement is singular");
    // schur_ holds D (M - Xi^T Khat^{-1} Xi) D; undo the congruence scaling.
    const Matrix& vecs = schur_eig_.eigenvectors();
    const Vector scaled = mscale_.cwiseProduct(rhs);
    return mscale_.cwiseProduct(Vector(vecs * (vecs.transpose() * scaled).cwiseQuotient(lambda)));
  }

  const QnHistory* hist_;
  std::shared_ptr<const KnownHessianOp> k_;
  double sigma_;
  double delta_ = 0.0;
  Index dense_cap_;

  Matrix q_;       // V + sigma S
  Matrix middle_;  // 2j x 2j middle matrix, equilibrated as D M D
  Vector mscale_;  // diagonal D of the congruence scaling
  Eigen::SelfAdjointEigenSolver<Matrix> middle_eig_;
  bool base_valid_ = false;
  std::uint64_t base_version_ = 0;
  double base_sigma_ = 0.0;

  Matrix qhat_, uhat_;  // Khat^{-1} Q, Khat^{-1} U
  Matrix schur_;        // D (M - Xi^T Khat^{-1} Xi) D, same D as middle_
  Eigen::SelfAdjointEigenSolver<Matrix> schur_eig_;
  bool smw_valid_ = false;
  double smw_delta_ = -1.0;
};

}  // namespace slbfgs
