#pragma once

#include <memory>
#include <string>

#include "slbfgs/known_hessian.hpp"
#include "slbfgs/types.hpp"

// A structured objective f = k + u where k has known gradient and Hessian and
// u contributes gradients only. Evaluators are const and safe to call
// concurrently from multiple threads.

namespace slbfgs {

class StructuredProblem {
 public:
  virtual ~StructuredProblem() = default;

  virtual Index dim() const = 0;
  virtual std::string name() const = 0;

  /// Full objective value f(x) = k(x) + u(x).
  virtual double eval_f(const Vector& x) const = 0;

  /// Gradient of the known part k.
  virtual Vector eval_grad_k(const Vector& x) const = 0;

  /// Gradient of the unknown-Hessian part u.
  virtual Vector eval_grad_u(const Vector& x) const = 0;

  /// Hessian of k at x as an operator handle. Constant-Hessian problems may
  /// return the same handle for every x (the handle's is_constant reports it).
  virtual std::shared_ptr<const KnownHessianOp> known_hessian(const Vector& x) const = 0;

  /// Full gradient at x.
  Vector eval_grad(const Vector& x) const { return eval_grad_k(x) + eval_grad_u(x); }
};

}  // namespace slbfgs
