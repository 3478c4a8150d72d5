#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "slbfgs/dense_kernels.hpp"
#include "slbfgs/line_search.hpp"
#include "slbfgs/structured_problem.hpp"
#include "slbfgs/types.hpp"

// Dense full-memory reference implementations of the update recursions. These
// are deliberately direct transcriptions used as test oracles and for
// desk-scale full-memory comparison runs; nothing here is limited-memory and
// dimensions are expected to stay small (n <= 200).

namespace slbfgs::oracle {

/// One classic BFGS update:
/// B+ = B - B s s^T B / (s^T B s) + y y^T / (s^T y).
inline Matrix bfgs_update(const Matrix& B, const Vector& s, const Vector& y) {
  detail::require(B.rows() == B.cols() && B.rows() == s.size() && s.size() == y.size(),
                  "bfgs_update: shape mismatch");
  const double sty = s.dot(y);
  if (!(sty > 0.0)) throw CurvatureViolation("bfgs_update: s^T y must be positive");
  const Vector Bs = B * s;
  const double sBs = s.dot(Bs);
  if (!(sBs > 0.0)) throw CurvatureViolation("bfgs_update: s^T B s must be positive");
  return B - (Bs * Bs.transpose()) / sBs + (y * y.transpose()) / sty;
}

/// Dense compact form of k BFGS updates applied to B0 with pair matrices
/// S, Y (columns oldest to newest):
/// B = B0 - [B0 S, Y] [[S^T B0 S, L], [L^T, -D]]^{-1} [S^T B0; Y^T]
/// where L is the strictly lower triangle of S^T Y and D its diagonal.
inline Matrix compact_bfgs_dense(const Matrix& B0, const Matrix& S, const Matrix& Y) {
  detail::require(B0.rows() == B0.cols() && B0.rows() == S.rows() && S.rows() == Y.rows() &&
                      S.cols() == Y.cols(),
                  "compact_bfgs_dense: shape mismatch");
  const Index k = S.cols();
  if (k == 0) return B0;
  const Matrix STY = S.transpose() * Y;
  const Matrix L = STY.triangularView<Eigen::StrictlyLower>();
  const Matrix B0S = B0 * S;
  Matrix M(2 * k, 2 * k);
  M.topLeftCorner(k, k) = S.transpose() * B0S;
  M.topRightCorner(k, k) = L;
  M.bottomLeftCorner(k, k) = L.transpose();
  M.bottomRightCorner(k, k) = Matrix((-STY.diagonal()).asDiagonal());
  Matrix Phi(B0.rows(), 2 * k);
  Phi.leftCols(k) = B0S;
  Phi.rightCols(k) = Y;
  return B0 - Phi * dense::sym_solve(M, Matrix(Phi.transpose()));
}

/// One structured update of the Minus recursion. B = A + K_now is the full
/// approximation before the step; the result approximates the unknown block
/// at the next iterate:
/// A+ = B - K_next - B s s^T B / (s^T B s) + u u^T / (s^T u).
inline Matrix sbfgs_minus_update(const Matrix& A, const Matrix& K_now, const Matrix& K_next,
                                 const Vector& s, const Vector& u) {
  detail::require(A.rows() == A.cols() && K_now.rows() == K_now.cols() &&
                      K_next.rows() == K_next.cols() && A.rows() == K_now.rows() &&
                      A.rows() == K_next.rows() && A.rows() == s.size() && s.size() == u.size(),
                  "sbfgs_minus_update: shape mismatch");
  const double stu = s.dot(u);
  if (!(stu > 0.0)) throw CurvatureViolation("sbfgs_minus_update: s^T u must be positive");
  const Matrix B = A + K_now;
  const Vector Bs = B * s;
  const double sBs = s.dot(Bs);
  if (!(std::abs(sBs) > 0.0))
    throw DegenerateCurvature("sbfgs_minus_update: s^T (A + K) s vanished");
  return B - K_next - (Bs * Bs.transpose()) / sBs + (u * u.transpose()) / stu;
}

/// One structured update of the Plus recursion with Bhat = A + K_next:
/// A+ = A - Bhat s s^T Bhat / (s^T Bhat s) + u u^T / (s^T u).
inline Matrix sbfgs_plus_update(const Matrix& A, const Matrix& K_next, const Vector& s,
                                const Vector& u) {
  detail::require(A.rows() == A.cols() && K_next.rows() == K_next.cols() &&
                      A.rows() == K_next.rows() && A.rows() == s.size() && s.size() == u.size(),
                  "sbfgs_plus_update: shape mismatch");
  const double stu = s.dot(u);
  if (!(stu > 0.0)) throw CurvatureViolation("sbfgs_plus_update: s^T u must be positive");
  const Matrix Bhat = A + K_next;
  const Vector Bs = Bhat * s;
  const double sBs = s.dot(Bs);
  if (!(std::abs(sBs) > 1e-300))
    throw DegenerateCurvature("sbfgs_plus_update: s^T (A + K+) s vanished");
  return A - (Bs * Bs.transpose()) / sBs + (u * u.transpose()) / stu;
}

/// Result of the dense full-memory Plus driver: the visited iterates
/// (including x0) and whether the gradient tolerance was met.
struct FullMemoryRun {
  std::vector<Vector> iterates;
  bool converged = false;
  Index iterations = 0;
};

/// Minimizes a structured problem with the dense full-memory Plus recursion,
/// constant scalar initialization A0 = sigma_bar I, and the same line search
/// the limited-memory solver uses. Intended for iterate-level comparison at
/// desk scale; requires dim <= 200.
inline FullMemoryRun minimize_plus_full_memory(const StructuredProblem& problem,
                                               const Vector& x0, double sigma_bar, double eps,
                                               Index max_iters,
                                               const WolfeConfig& wolfe = WolfeConfig{}) {
  const Index n = problem.dim();
  detail::require(n <= 200, "minimize_plus_full_memory: dimension capped at 200");
  FullMemoryRun run;
  Vector x = x0;
  run.iterates.push_back(x);
  Matrix A = sigma_bar * Matrix::Identity(n, n);
  double f = problem.eval_f(x);
  Vector gk = problem.eval_grad_k(x);
  Vector gu = problem.eval_grad_u(x);
  Vector g = gk + gu;
  for (Index k = 0; k < max_iters; ++k) {
    if (g.lpNorm<Eigen::Infinity>() <= eps) {
      run.converged = true;
      return run;
    }
    const Matrix K = problem.known_hessian(x)->to_dense();
    Matrix H = K + A;
    double delta = 0.0;
    if (!dense::is_positive_definite(H)) {
      delta = 1.0;
      while (delta <= 1e12 &&
             !dense::is_positive_definite(Matrix(H + delta * Matrix::Identity(n, n))))
        delta *= 10.0;
      if (delta > 1e12)
        throw RegularizationFailed("minimize_plus_full_memory: regularization cap reached");
      H += delta * Matrix::Identity(n, n);
    }
    const Vector p = -Eigen::LDLT<Matrix>(H).solve(g);
    const StepResult step = strong_wolfe_structured(problem, x, f, g, gu, p, wolfe);
    if (step.status != LineSearchStatus::kConverged) return run;
    x = step.x_new;
    f = step.f_new;
    g = step.g_new;
    gu = step.grad_u_new;
    run.iterates.push_back(x);
    run.iterations = k + 1;
    const double tol = 1e-12 * step.s.norm() * step.u.norm();
    if (step.s.dot(step.u) > tol)
      A = sbfgs_plus_update(A, problem.known_hessian(x)->to_dense(), step.s, step.u);
  }
  run.converged = g.lpNorm<Eigen::Infinity>() <= eps;
  return run;
}

}  // namespace slbfgs::oracle
