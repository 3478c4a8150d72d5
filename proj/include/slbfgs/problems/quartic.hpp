#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>

#include "slbfgs/structured_problem.hpp"
#include "slbfgs/types.hpp"

// Separable quartic test family
//   k(x) = (1/12) sum_i (a_i^2 x_i^4 + 12 x_i g_i)
//   u(x) = (1/2)  sum_i q_i x_i^2
// so K(x) = diag(a_i^2 x_i^2) varies with the iterate and the unknown-part
// Hessian diag(q) may be indefinite. Coefficients a, g, q are standard normal
// draws; a_i with |a_i| < 0.1 are resampled so the known Hessian cannot be
// near-singular across the whole path from the all-ones start.

namespace slbfgs {

class StructuredQuartic final : public StructuredProblem {
 public:
  StructuredQuartic(Index n, std::uint64_t seed) : n_(n), seed_(seed) {
    detail::require(n >= 1, "StructuredQuartic: dimension must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    a_.resize(n);
    g_.resize(n);
    q_.resize(n);
    for (Index i = 0; i < n; ++i) {
      double a = normal(rng);
      while (std::abs(a) < 0.1) a = normal(rng);
      a_(i) = a;
    }
    for (Index i = 0; i < n; ++i) g_(i) = normal(rng);
    for (Index i = 0; i < n; ++i) q_(i) = normal(rng);
  }

  /// Fixed-coefficient constructor used by small worked examples.
  StructuredQuartic(Vector a, Vector g, Vector q)
      : n_(a.size()), seed_(0), a_(std::move(a)), g_(std::move(g)), q_(std::move(q)) {
    detail::require(n_ >= 1 && g_.size() == n_ && q_.size() == n_,
                    "StructuredQuartic: coefficient lengths differ");
  }

  Index dim() const override { return n_; }
  std::string name() const override {
    return "structured_quartic_n" + std::to_string(n_) + "_s" + std::to_string(seed_);
  }

  double eval_f(const Vector& x) const override {
    const auto x2 = x.array().square();
    return (a_.array().square() * x2.square()).sum() / 12.0 + x.dot(g_) +
           0.5 * (q_.array() * x2).sum();
  }

  Vector eval_grad_k(const Vector& x) const override {
    return ((a_.array().square() * x.array().cube()) / 3.0).matrix() + g_;
  }

  Vector eval_grad_u(const Vector& x) const override { return q_.cwiseProduct(x); }

  /// K(x) = diag(a_i^2 x_i^2), rebuilt per iterate.
  std::shared_ptr<const KnownHessianOp> known_hessian(const Vector& x) const override {
    return std::make_shared<DiagonalOp>(Vector(a_.array().square() * x.array().square()));
  }

  const Vector& coeff_a() const { return a_; }
  const Vector& coeff_g() const { return g_; }
  const Vector& coeff_q() const { return q_; }

 private:
  Index n_;
  std::uint64_t seed_;
  Vector a_, g_, q_;
};

}  // namespace slbfgs
