#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>

#include "slbfgs/structured_problem.hpp"
#include "slbfgs/types.hpp"

// Structured quadratic test family
//   f(x) = x^T g + Q1(x) + Q2(x),  Qi(x) = 0.5 x^T (phi I + Wi Di Wi^T) x,
// with Wi an n x r orthonormal basis and Di diagonal. The known part is
// k(x) = x^T g + Q1(x), the unknown part is u(x) = Q2(x), so
// K = phi I + W1 D1 W1^T is constant. All randomness is seeded.

namespace slbfgs {

/// K = c I + W D W^T with W having orthonormal columns.
class LowRankPlusIdentityOp final : public KnownHessianOp {
 public:
  LowRankPlusIdentityOp(double c, Matrix w, Vector d)
      : c_(c), w_(std::move(w)), d_(std::move(d)) {
    detail::require(w_.cols() == d_.size(), "LowRankPlusIdentityOp: rank mismatch");
  }

  Index dim() const override { return w_.rows(); }

  Vector apply(const Vector& x) const override {
    return c_ * x + w_ * d_.cwiseProduct(w_.transpose() * x);
  }

  /// (a I + W D W^T)^{-1} rhs with a = c + sigma, using orthonormality of W:
  /// rhs / a - W diag(d_i / (a (a + d_i))) W^T rhs.
  Vector solve_shifted(double sigma, const Vector& rhs) const override {
    const double a = c_ + sigma;
    const Vector coeff = (d_.array() / (a * (a + d_.array()))).matrix();
    return rhs / a - w_ * coeff.cwiseProduct(w_.transpose() * rhs);
  }

  /// Eigenvalues of the shifted operator are a (multiplicity n - r) and
  /// a + d_i, so the probe is exact.
  bool shifted_positive_definite(double sigma) const override {
    const double a = c_ + sigma;
    if (!(a > 0.0)) return false;
    return d_.size() == 0 || (d_.array() + a).minCoeff() > 0.0;
  }

  bool is_constant() const override { return true; }
  double cost_factor() const override { return 2.0 * static_cast<double>(d_.size()); }

  double identity_scale() const { return c_; }
  const Matrix& basis() const { return w_; }
  const Vector& factors() const { return d_; }

 private:
  double c_;
  Matrix w_;
  Vector d_;
};

namespace detail_problems {

/// Orthonormalizes the columns of a random Gaussian matrix by modified
/// Gram-Schmidt with one reorthogonalization pass.
inline Matrix random_orthonormal(Index n, Index r, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(n, r);
  for (Index c = 0; c < r; ++c)
    for (Index i = 0; i < n; ++i) w(i, c) = normal(rng);
  for (Index c = 0; c < r; ++c) {
    for (int pass = 0; pass < 2; ++pass)
      for (Index k = 0; k < c; ++k) w.col(c) -= w.col(k).dot(w.col(c)) * w.col(k);
    w.col(c) /= w.col(c).norm();
  }
  return w;
}

}  // namespace detail_problems

class StructuredQuadratic final : public StructuredProblem {
 public:
  /// n: dimension, r: rank of each low-rank term (r <= n), phi: identity
  /// shift, [d_min, d_max]: uniform range of the diagonal factors.
  StructuredQuadratic(Index n, Index r, double phi, double d_min, double d_max,
                      std::uint64_t seed)
      : n_(n), phi_(phi), seed_(seed) {
    detail::require(n >= 1, "StructuredQuadratic: need n >= 1");
    if (r < 0 || r > n) throw BadRank("StructuredQuadratic: need 0 <= r <= n");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(d_min, d_max);
    w1_ = detail_problems::random_orthonormal(n, r, rng);
    w2_ = detail_problems::random_orthonormal(n, r, rng);
    d1_.resize(r);
    d2_.resize(r);
    for (Index i = 0; i < r; ++i) d1_(i) = uniform(rng);
    for (Index i = 0; i < r; ++i) d2_(i) = uniform(rng);
    g_.resize(n);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i) g_(i) = normal(rng);
    k_op_ = std::make_shared<LowRankPlusIdentityOp>(phi, w1_, d1_);
  }

  Index dim() const override { return n_; }

  std::string name() const override {
    return "structured_quadratic_n" + std::to_string(n_) + "_r" + std::to_string(d1_.size()) +
           "_phi" + std::to_string(static_cast<long long>(phi_)) + "_s" + std::to_string(seed_);
  }

  double eval_f(const Vector& x) const override {
    const Vector t1 = w1_.transpose() * x;
    const Vector t2 = w2_.transpose() * x;
    return x.dot(g_) + phi_ * x.squaredNorm() + 0.5 * t1.dot(d1_.cwiseProduct(t1)) +
           0.5 * t2.dot(d2_.cwiseProduct(t2));
  }

  Vector eval_grad_k(const Vector& x) const override {
    return g_ + phi_ * x + w1_ * d1_.cwiseProduct(w1_.transpose() * x);
  }

  Vector eval_grad_u(const Vector& x) const override {
    return phi_ * x + w2_ * d2_.cwiseProduct(w2_.transpose() * x);
  }

  std::shared_ptr<const KnownHessianOp> known_hessian(const Vector&) const override {
    return k_op_;
  }

  /// Solves grad f(x*) = 0 exactly through a Woodbury identity on the
  /// combined low-rank Hessian 2 phi I + [W1 W2] diag(D1, D2) [W1 W2]^T.
  Vector analytic_minimizer() const {
    const Index r = d1_.size();
    const double a = 2.0 * phi_;
    if (r == 0) return Vector(-g_ / a);
    Matrix w(n_, 2 * r);
    w.leftCols(r) = w1_;
    w.rightCols(r) = w2_;
    Vector lambda(2 * r);
    lambda.head(r) = d1_;
    lambda.tail(r) = d2_;
    const Matrix wtw = w.transpose() * w;
    Matrix sys = Matrix::Identity(2 * r, 2 * r) + lambda.asDiagonal() * wtw / a;
    const Vector rhs = lambda.cwiseProduct(w.transpose() * (-g_)) / a;
    const Vector y = sys.partialPivLu().solve(rhs);
    return (-g_ - w * y) / a;
  }

  double phi() const { return phi_; }
  const Vector& linear_term() const { return g_; }
  const Matrix& basis1() const { return w1_; }
  const Matrix& basis2() const { return w2_; }
  const Vector& factors1() const { return d1_; }
  const Vector& factors2() const { return d2_; }

 private:
  Index n_;
  double phi_;
  std::uint64_t seed_;
  Matrix w1_, w2_;
  Vector d1_, d2_;
  Vector g_;
  std::shared_ptr<const KnownHessianOp> k_op_;
};

}  // namespace slbfgs
