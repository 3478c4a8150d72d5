#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "slbfgs/structured_problem.hpp"
#include "slbfgs/types.hpp"

// Strong Wolfe line search (bracketing stage plus zoom with safeguarded cubic
// interpolation) extended with an optional structured curvature acceptance
// test: a trial step alpha is accepted only if s^T u(alpha) > 0, where
// s = alpha p and u(alpha) = K(x + alpha p) s + grad_u(x + alpha p) -
// grad_u(x). The extra condition keeps the Minus recursion positive definite.

namespace slbfgs {

enum class LineSearchStatus {
  kConverged,  ///< all acceptance conditions hold at the returned step
  kMaxEvals,   ///< evaluation budget exhausted or interval collapsed
  kNoDescent,  ///< the supplied direction is not a descent direction
};

struct WolfeConfig {
  double c1 = 1e-4;         ///< sufficient decrease constant
  double c2 = 0.9;          ///< curvature constant
  double alpha_init = 1.0;  ///< first trial step
  double alpha_max = 1e8;   ///< largest step the bracketing stage may reach
  int max_evals = 60;       ///< function/gradient evaluation budget
  bool require_structured_curvature = false;  ///< also demand s^T u(alpha) > 0
};

struct StepResult {
  LineSearchStatus status = LineSearchStatus::kMaxEvals;
  int evals = 0;      ///< trial evaluations consumed (f and gradient together)
  double alpha = 0.0;
  double f_new = std::numeric_limits<double>::quiet_NaN();
  Vector x_new;       ///< accepted point (valid only when converged)
  Vector g_new;       ///< full gradient at x_new
  Vector grad_u_new;  ///< gradient of the unknown part at x_new
  Vector s;           ///< x_new - x
  Vector u;           ///< K(x_new) s + grad_u_new - grad_u(x)
  Vector v;           ///< K(x_new) s
  std::shared_ptr<const KnownHessianOp> k_new;  ///< Hessian handle at x_new
};

namespace detail_ls {

struct Trial {
  double alpha = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
  double f = 0.0;
  Vector x, g, gu;
};

/// Minimizer of the cubic Hermite interpolant through two trials, safeguarded
/// to the interior of the interval; falls back to bisection.
inline double interp_step(const Trial& a, const Trial& b) {
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  const double w = hi - lo;
  const double mid = 0.5 * (lo + hi);
  if (!(w > 0.0)) return mid;
  const double d1 = a.dphi + b.dphi - 3.0 * (a.phi - b.phi) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.dphi * b.dphi;
  if (!(disc >= 0.0)) return mid;
  const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
  const double denom = b.dphi - a.dphi + 2.0 * d2;
  if (denom == 0.0) return mid;
  double t = b.alpha - (b.alpha - a.alpha) * (b.dphi + d2 - d1) / denom;
  if (!std::isfinite(t)) return mid;
  const double margin = 0.1 * w;
  if (t < lo + margin || t > hi - margin) return mid;
  return t;
}

}  // namespace detail_ls

/// Searches along p from x for a step satisfying the strong Wolfe conditions
/// (and, when configured, the structured curvature condition). f0, g0 and
/// grad_u0 are the objective, full gradient and unknown-part gradient at x.
/// Never throws for normal failure modes; the status field reports them.
inline StepResult strong_wolfe_structured(const StructuredProblem& problem, const Vector& x,
                                          double f0, const Vector& g0, const Vector& grad_u0,
                                          const Vector& p, const WolfeConfig& cfg = {}) {
  using detail_ls::Trial;
  if (!(cfg.c1 > 0.0) || !(cfg.c1 <= cfg.c2) || !(cfg.c2 < 1.0))
    throw ConfigError("wolfe constants must satisfy 0 < c1 <= c2 < 1");
  if (!(cfg.alpha_init > 0.0) || !(cfg.alpha_max >= cfg.alpha_init))
    throw ConfigError("wolfe step bounds must satisfy 0 < alpha_init <= alpha_max");
  if (cfg.max_evals < 1) throw ConfigError("wolfe max_evals must be at least 1");
  StepResult result;
  const double dphi0 = g0.dot(p);
  if (!(dphi0 < 0.0) || !std::isfinite(dphi0)) {
    result.status = LineSearchStatus::kNoDescent;
    return result;
  }
  const double armijo_slope = cfg.c1 * dphi0;
  const double wolfe_bound = -cfg.c2 * dphi0;

  auto evaluate = [&](double alpha) {
    Trial t;
    t.alpha = alpha;
    t.x = x + alpha * p;
    t.f = problem.eval_f(t.x);
    t.gu = problem.eval_grad_u(t.x);
    t.g = problem.eval_grad_k(t.x) + t.gu;
    t.phi = t.f;
    t.dphi = t.g.dot(p);
    ++result.evals;
    return t;
  };

  // Fills the result from an accepted trial; returns false when the
  // structured curvature condition is demanded and fails.
  auto try_accept = [&](const Trial& t) {
    Vector s = t.alpha * p;
    auto k_op = problem.known_hessian(t.x);
    Vector v = k_op->apply(s);
    Vector u = v + t.gu - grad_u0;
    if (cfg.require_structured_curvature && !(s.dot(u) > 0.0)) return false;
    result.status = LineSearchStatus::kConverged;
    result.alpha = t.alpha;
    result.f_new = t.f;
    result.x_new = t.x;
    result.g_new = t.g;
    result.grad_u_new = t.gu;
    result.s = std::move(s);
    result.u = std::move(u);
    result.v = std::move(v);
    result.k_new = std::move(k_op);
    return true;
  };

  auto armijo_ok = [&](const Trial& t) {
    return std::isfinite(t.phi) && t.phi <= f0 + t.alpha * armijo_slope;
  };

  // Zoom phase: lo satisfies sufficient decrease and has the lowest value
  // seen; the minimizer is bracketed between lo and hi.
  auto zoom = [&](Trial lo, Trial hi) {
    while (result.evals < cfg.max_evals) {
      const double width = std::abs(hi.alpha - lo.alpha);
      if (!(width > 1e-14 * std::max(1.0, std::max(std::abs(lo.alpha), std::abs(hi.alpha)))))
        break;
      Trial t = evaluate(detail_ls::interp_step(lo, hi));
      if (!armijo_ok(t) || t.phi >= lo.phi) {
        hi = t;
        continue;
      }
      if (std::abs(t.dphi) <= wolfe_bound && try_accept(t)) return;
      if (t.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = t;
    }
    result.status = LineSearchStatus::kMaxEvals;
  };

  Trial prev;
  prev.alpha = 0.0;
  prev.phi = f0;
  prev.dphi = dphi0;
  prev.f = f0;
  prev.x = x;
  prev.g = g0;
  prev.gu = grad_u0;

  double alpha = std::min(cfg.alpha_init, cfg.alpha_max);
  for (int iter = 1; result.evals < cfg.max_evals; ++iter) {
    Trial t = evaluate(alpha);
    if (!armijo_ok(t) || (iter > 1 && t.phi >= prev.phi)) {
      zoom(prev, t);
      return result;
    }
    if (std::abs(t.dphi) <= wolfe_bound && try_accept(t)) return result;
    if (t.dphi >= 0.0) {
      zoom(t, prev);
      return result;
    }
    if (t.alpha >= cfg.alpha_max) break;
    prev = t;
    alpha = std::min(2.0 * alpha, cfg.alpha_max);
  }
  result.status = LineSearchStatus::kMaxEvals;
  return result;
}

}  // namespace slbfgs
