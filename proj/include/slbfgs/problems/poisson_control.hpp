#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "slbfgs/structured_problem.hpp"
#include "slbfgs/types.hpp"

// Discretized control problem on the unit square: the state y solves the
// 5-point-stencil Poisson system A y = x + g with zero Dirichlet boundary
// (so g = 0), and the objective penalizes control energy and tracking error:
//   k(x) = 0.5 |x|^2                       (K = I)
//   u(x) = 0.5 | A^{-1}(x + g) - y* |^2
// with target y* sampled from sin(pi u) sin(pi v) at the interior nodes.
// Mesh index j gives 10 j mesh points per direction, so the interior grid is
// N x N with N = 10 j - 2 and n = N^2. A is symmetric positive definite and
// factored once at construction.

namespace slbfgs {

class PoissonControl final : public StructuredProblem {
 public:
  explicit PoissonControl(Index mesh_index) : mesh_index_(mesh_index) {
    detail::require(mesh_index >= 1, "PoissonControl: mesh index must be >= 1");
    const Index N = 10 * mesh_index - 2;
    n_ = N * N;
    const double h = 1.0 / static_cast<double>(N + 1);
    const double inv_h2 = 1.0 / (h * h);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(5 * n_));
    auto node = [N](Index i, Index jj) { return i * N + jj; };
    for (Index i = 0; i < N; ++i) {
      for (Index jj = 0; jj < N; ++jj) {
        const Index row = node(i, jj);
        triplets.emplace_back(row, row, 4.0 * inv_h2);
        if (i > 0) triplets.emplace_back(row, node(i - 1, jj), -inv_h2);
        if (i + 1 < N) triplets.emplace_back(row, node(i + 1, jj), -inv_h2);
        if (jj > 0) triplets.emplace_back(row, node(i, jj - 1), -inv_h2);
        if (jj + 1 < N) triplets.emplace_back(row, node(i, jj + 1), -inv_h2);
      }
    }
    a_.resize(n_, n_);
    a_.setFromTriplets(triplets.begin(), triplets.end());
    solver_.compute(a_);
    detail::require(solver_.info() == Eigen::Success,
                    "PoissonControl: sparse factorization failed");

    boundary_term_ = Vector::Zero(n_);  // zero Dirichlet data
    y_star_.resize(n_);
    for (Index i = 0; i < N; ++i) {
      const double u = static_cast<double>(i + 1) * h;
      for (Index jj = 0; jj < N; ++jj) {
        const double v = static_cast<double>(jj + 1) * h;
        y_star_(node(i, jj)) = std::sin(M_PI * u) * std::sin(M_PI * v);
      }
    }
    k_op_ = std::make_shared<ScaledIdentityOp>(n_, 1.0);
  }

  Index dim() const override { return n_; }
  std::string name() const override { return "poisson_control_j" + std::to_string(mesh_index_); }
  Index mesh_index() const { return mesh_index_; }
  const Vector& target() const { return y_star_; }

  /// State solve y = A^{-1}(x + g).
  Vector state(const Vector& x) const { return solver_.solve(x + boundary_term_); }

  double eval_f(const Vector& x) const override {
    const Vector r = state(x) - y_star_;
    return 0.5 * x.squaredNorm() + 0.5 * r.squaredNorm();
  }

  Vector eval_grad_k(const Vector& x) const override { return x; }

  /// Adjoint gradient A^{-T}(A^{-1}(x + g) - y*); A is symmetric.
  Vector eval_grad_u(const Vector& x) const override {
    const Vector r = state(x) - y_star_;
    return solver_.solve(r);
  }

  std::shared_ptr<const KnownHessianOp> known_hessian(const Vector&) const override {
    return k_op_;
  }

 private:
  Index mesh_index_;
  Index n_ = 0;
  Eigen::SparseMatrix<double> a_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  Vector boundary_term_;
  Vector y_star_;
  std::shared_ptr<const KnownHessianOp> k_op_;
};

}  // namespace slbfgs
