#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "slbfgs/problems/libsvm.hpp"
#include "slbfgs/structured_problem.hpp"
#include "slbfgs/types.hpp"

// L2-regularized logistic regression as a structured objective:
//   k(x) = (lambda / 2) |x|^2              (K = lambda I)
//   u(x) = sum_i log(1 + exp(-y_i x^T d_i))
// Labels are mapped to {-1, +1} by sign: y = +1 when the raw label is
// positive, -1 otherwise. Evaluation uses the overflow-safe form
// log(1 + e^t) = max(t, 0) + log1p(exp(-|t|)).

namespace slbfgs {

class LogisticRegression final : public StructuredProblem {
 public:
  LogisticRegression(SparseDataset data, double lambda, std::string name = "logistic")
      : lambda_(lambda), name_(std::move(name)) {
    detail::require(lambda > 0.0, "LogisticRegression: lambda must be positive");
    n_ = data.n_features;
    if (data.samples.empty()) throw EmptyDataset("LogisticRegression: dataset has no samples");
    if (n_ < 1) throw EmptyDataset("LogisticRegression: dataset has no features");
    row_start_.reserve(data.samples.size() + 1);
    row_start_.push_back(0);
    labels_.reserve(data.samples.size());
    for (const SparseSample& sample : data.samples) {
      labels_.push_back(sample.label > 0.0 ? 1.0 : -1.0);
      for (const auto& [index, value] : sample.features) {
        col_.push_back(index);
        val_.push_back(value);
      }
      row_start_.push_back(static_cast<Index>(col_.size()));
    }
    k_op_ = std::make_shared<ScaledIdentityOp>(n_, lambda_);
  }

  Index dim() const override { return n_; }
  std::string name() const override { return name_; }
  Index n_samples() const { return static_cast<Index>(labels_.size()); }
  double lambda() const { return lambda_; }

  double eval_f(const Vector& x) const override {
    double loss = 0.0;
    for (Index i = 0; i < n_samples(); ++i) {
      const double t = -labels_[static_cast<std::size_t>(i)] * row_dot(i, x);
      loss += std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
    }
    return 0.5 * lambda_ * x.squaredNorm() + loss;
  }

  Vector eval_grad_k(const Vector& x) const override { return lambda_ * x; }

  Vector eval_grad_u(const Vector& x) const override {
    Vector grad = Vector::Zero(n_);
    for (Index i = 0; i < n_samples(); ++i) {
      const double y = labels_[static_cast<std::size_t>(i)];
      const double t = -y * row_dot(i, x);
      const double w = -y * sigmoid(t);
      for (Index k = row_start_[static_cast<std::size_t>(i)];
           k < row_start_[static_cast<std::size_t>(i) + 1]; ++k)
        grad(col_[static_cast<std::size_t>(k)]) += w * val_[static_cast<std::size_t>(k)];
    }
    return grad;
  }

  std::shared_ptr<const KnownHessianOp> known_hessian(const Vector&) const override {
    return k_op_;
  }

 private:
  static double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
  }

  double row_dot(Index i, const Vector& x) const {
    double acc = 0.0;
    for (Index k = row_start_[static_cast<std::size_t>(i)];
         k < row_start_[static_cast<std::size_t>(i) + 1]; ++k)
      acc += val_[static_cast<std::size_t>(k)] * x(col_[static_cast<std::size_t>(k)]);
    return acc;
  }

  double lambda_;
  std::string name_;
  Index n_ = 0;
  std::vector<double> labels_;
  std::vector<Index> row_start_;
  std::vector<Index> col_;
  std::vector<double> val_;
  std::shared_ptr<const KnownHessianOp> k_op_;
};

}  // namespace slbfgs
