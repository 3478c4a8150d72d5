#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "slbfgs/types.hpp"

// Abstract handle for the known Hessian block K of a structured objective,
// exposing the three capabilities the solvers need: products K x, shifted
// solves (K + sigma I) z = r, and a positive-definiteness probe of the
// shifted operator. Implementations are immutable snapshots at one iterate
// and safe to share across threads.

namespace slbfgs {

class KnownHessianOp {
 public:
  virtual ~KnownHessianOp() = default;

  virtual Index dim() const = 0;

  /// K x.
  virtual Vector apply(const Vector& x) const = 0;

  /// Solves (K + sigma I) z = rhs. Preconditions: the shifted operator is
  /// nonsingular (callers probe positive definiteness first).
  virtual Vector solve_shifted(double sigma, const Vector& rhs) const = 0;

  /// True iff K + sigma I is positive definite.
  virtual bool shifted_positive_definite(double sigma) const = 0;

  /// Whether this operator can decide shifted_positive_definite exactly and
  /// cheaply. Operators that cannot leave callers to a dense fallback.
  virtual bool can_probe_pd() const { return true; }

  /// True when K does not depend on the iterate, so one handle serves the
  /// whole run.
  virtual bool is_constant() const { return false; }

  /// Apply/solve cost in units of n multiplications (the "l" cost factor).
  virtual double cost_factor() const { return 1.0; }

  /// Dense n x n materialization, intended for tests and small-n fallbacks.
  virtual Matrix to_dense() const {
    const Index n = dim();
    Matrix K(n, n);
    Vector e = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      e(i) = 1.0;
      K.col(i) = apply(e);
      e(i) = 0.0;
    }
    return K;
  }
};

/// K = c I.
class ScaledIdentityOp final : public KnownHessianOp {
 public:
  ScaledIdentityOp(Index n, double c) : n_(n), c_(c) {}

  Index dim() const override { return n_; }
  Vector apply(const Vector& x) const override { return c_ * x; }
  Vector solve_shifted(double sigma, const Vector& rhs) const override {
    return rhs / (c_ + sigma);
  }
  bool shifted_positive_definite(double sigma) const override {
    return c_ + sigma > 0.0;
  }
  bool is_constant() const override { return true; }
  double scale() const { return c_; }

 private:
  Index n_;
  double c_;
};

/// K = diag(d).
class DiagonalOp final : public KnownHessianOp {
 public:
  explicit DiagonalOp(Vector d) : d_(std::move(d)) {}

  Index dim() const override { return d_.size(); }
  Vector apply(const Vector& x) const override { return d_.cwiseProduct(x); }
  Vector solve_shifted(double sigma, const Vector& rhs) const override {
    return (rhs.array() / (d_.array() + sigma)).matrix();
  }
  bool shifted_positive_definite(double sigma) const override {
    return (d_.array() + sigma).minCoeff() > 0.0;
  }
  const Vector& diagonal() const { return d_; }

 private:
  Vector d_;
};

}  // namespace slbfgs
