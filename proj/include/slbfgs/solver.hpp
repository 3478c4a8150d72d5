#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slbfgs/line_search.hpp"
#include "slbfgs/qn_history.hpp"
#include "slbfgs/sbfgs_minus.hpp"
#include "slbfgs/sbfgs_plus.hpp"
#include "slbfgs/structured_problem.hpp"
#include "slbfgs/types.hpp"

// Line-search driver for the structured limited-memory solvers. Each
// iteration computes a direction from the active compact representation,
// runs the strong Wolfe search, forms the new pair
//   s = x+ - x,  u = K(x+) s + grad_u(x+) - grad_u(x),  v = K(x+) s,
// updates the scalar initialization sigma, and stores the pair unless its
// curvature is rejected.

namespace slbfgs {

enum class Variant { kMinus, kPlus };

/// Scalar initialization strategies:
///   kInit1: u^T u / s^T u      kInit2: uhat^T uhat / s^T uhat
///   kInit3: s^T u / s^T s      kInit4: s^T uhat / s^T s
///   kConstant: sigma never changes
/// where uhat = grad_u(x+) - grad_u(x).
enum class SigmaStrategy { kInit1, kInit2, kInit3, kInit4, kConstant };

enum class MinusInitMode { kScalar, kOperator };

enum class DeltaMode { kPowerOfTen, kCheapFormula };

enum class CurvatureMode { kAuto, kOn, kOff };

enum class RunStatus { kConverged, kMaxIters, kLineSearchFailure, kRegularizationFailure };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kMaxIters: return "max-iters";
    case RunStatus::kLineSearchFailure: return "line-search-failure";
    case RunStatus::kRegularizationFailure: return "regularization-failure";
  }
  return "unknown";
}

/// Next scalar initialization per the chosen strategy, safeguarded: when the
/// formula value is not finite or is at or below sigma_min the previous sigma
/// is kept. kConstant always keeps the previous sigma.
inline double sigma_next(SigmaStrategy strategy, double prev_sigma, const Vector& s,
                         const Vector& u, const Vector& u_hat, double sigma_min = 1e-8) {
  double value = prev_sigma;
  switch (strategy) {
    case SigmaStrategy::kInit1: value = u.squaredNorm() / s.dot(u); break;
    case SigmaStrategy::kInit2: value = u_hat.squaredNorm() / s.dot(u_hat); break;
    case SigmaStrategy::kInit3: value = s.dot(u) / s.squaredNorm(); break;
    case SigmaStrategy::kInit4: value = s.dot(u_hat) / s.squaredNorm(); break;
    case SigmaStrategy::kConstant: return prev_sigma;
  }
  if (!std::isfinite(value) || value <= sigma_min) return prev_sigma;
  return value;
}

struct SolverConfig {
  Variant variant = Variant::kMinus;
  Index memory = 8;
  SigmaStrategy sigma_strategy = SigmaStrategy::kInit1;
  double sigma0 = 1.0;       ///< starting sigma (scalar paths)
  double sigma_min = 1e-8;   ///< sigma safeguard floor
  MinusInitMode minus_init = MinusInitMode::kScalar;
  DeltaMode delta_mode = DeltaMode::kPowerOfTen;
  double delta_eps = 1e-8;   ///< epsilon of the cheap delta formula
  double epsilon = 1e-6;     ///< stop when the gradient infinity norm is <= epsilon
  Index max_iters = 10000;
  double curvature_rel_tol = 1e-12;  ///< pair rejection threshold factor
  Index dense_cap = 500;     ///< dense fallback cap for the Plus PD probe
  CurvatureMode structured_curvature = CurvatureMode::kAuto;  ///< kAuto: Minus on, Plus off
  WolfeConfig wolfe;
};

/// One row per visited iterate: the state at iterate k together with the step
/// that produced it (alpha, delta, s_dot_u are zero for k = 0) and the sigma
/// available for the next direction.
struct TraceRow {
  Index k = 0;
  double f = 0.0;
  double gnorm_inf = 0.0;
  double alpha = 0.0;
  double sigma = 0.0;
  double delta = 0.0;
  double s_dot_u = 0.0;
};

struct RunReport {
  RunStatus status = RunStatus::kMaxIters;
  Index iterations = 0;
  Index f_evals = 0;
  Index g_evals = 0;
  double final_f = std::numeric_limits<double>::quiet_NaN();
  double final_gnorm = std::numeric_limits<double>::quiet_NaN();
  double wall_time_seconds = 0.0;
  Index rejected_pairs = 0;  ///< curvature-rejected pair updates
  std::vector<TraceRow> trace;  ///< length iterations + 1
  Vector x;  ///< final iterate
};

namespace detail_solver {

inline void validate(const SolverConfig& cfg) {
  if (cfg.memory < 1) throw ConfigError("memory: must be >= 1");
  if (!(cfg.sigma0 > 0.0)) throw ConfigError("sigma0: must be positive");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon: must be positive");
  if (cfg.max_iters < 0) throw ConfigError("max_iters: must be >= 0");
  if (!(cfg.sigma_min > 0.0)) throw ConfigError("sigma_min: must be positive");
  if (!(cfg.wolfe.c1 > 0.0) || !(cfg.wolfe.c1 <= cfg.wolfe.c2) || !(cfg.wolfe.c2 < 1.0))
    throw ConfigError("wolfe.c1/wolfe.c2: must satisfy 0 < c1 <= c2 < 1");
  if (!(cfg.wolfe.alpha_init > 0.0) || !(cfg.wolfe.alpha_max >= cfg.wolfe.alpha_init))
    throw ConfigError("wolfe.alpha_init/alpha_max: must satisfy 0 < alpha_init <= alpha_max");
  if (cfg.wolfe.max_evals < 1) throw ConfigError("wolfe.max_evals: must be >= 1");
}

/// First sigma = 10^i, i >= 0, making sigma I + K0 positive definite.
inline double initial_operator_sigma(const KnownHessianOp& k0) {
  double sigma = 1.0;
  for (int i = 0; i <= 12; ++i, sigma *= 10.0)
    if (k0.shifted_positive_definite(sigma)) return sigma;
  throw InitNotPD("minimize: no sigma up to 1e12 makes sigma I + K0 positive definite");
}

}  // namespace detail_solver

/// Observer invoked with (k, x_k) after every accepted iterate, including the
/// starting point.
using IterateObserver = std::function<void(Index, const Vector&)>;

/// Minimizes a structured objective. Normal failure modes are reported
/// through RunReport::status, never exceptions.
inline RunReport minimize(const StructuredProblem& problem, const Vector& x0,
                          const SolverConfig& cfg, const IterateObserver& observer = {}) {
  detail_solver::validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const bool plus = cfg.variant == Variant::kPlus;
  const bool operator_init = !plus && cfg.minus_init == MinusInitMode::kOperator;

  WolfeConfig wolfe = cfg.wolfe;
  wolfe.require_structured_curvature = cfg.structured_curvature == CurvatureMode::kAuto
                                           ? !plus
                                           : cfg.structured_curvature == CurvatureMode::kOn;

  const Index n = problem.dim();
  detail::require(x0.size() == n, "minimize: x0 length does not match problem dimension");
  RunReport report;
  QnHistory history(n, cfg.memory, plus, cfg.curvature_rel_tol);

  Vector x = x0;
  double f = problem.eval_f(x);
  Vector gu = problem.eval_grad_u(x);
  Vector g = problem.eval_grad_k(x) + gu;
  report.f_evals = 1;
  report.g_evals = 1;

  std::shared_ptr<const KnownHessianOp> k_op;
  if (plus || operator_init) k_op = problem.known_hessian(x);

  auto gnorm = [](const Vector& grad) { return grad.lpNorm<Eigen::Infinity>(); };
  auto finish = [&](RunStatus status) {
    report.status = status;
    report.final_f = f;
    report.final_gnorm = gnorm(g);
    report.x = x;
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  };

  double sigma = cfg.sigma0;
  std::optional<MinusState> minus_state;
  std::optional<PlusState> plus_state;
  if (plus) {
    plus_state.emplace(&history, k_op, sigma, cfg.dense_cap);
  } else if (operator_init) {
    try {
      sigma = detail_solver::initial_operator_sigma(*k_op);
    } catch (const InitNotPD&) {
      report.trace.push_back({0, f, gnorm(g), 0.0, sigma, 0.0, 0.0});
      return finish(RunStatus::kRegularizationFailure);
    }
    minus_state.emplace(&history, sigma, k_op);
  } else {
    minus_state.emplace(&history, sigma);
  }

  report.trace.push_back({0, f, gnorm(g), 0.0, sigma, 0.0, 0.0});
  if (observer) observer(0, x);

  // The most recent accepted pair, used by the cheap delta formula.
  Vector last_s, last_u, last_v;

  report.status = RunStatus::kMaxIters;
  for (Index k = 0; k < cfg.max_iters; ++k) {
    if (gnorm(g) <= cfg.epsilon) {
      report.status = RunStatus::kConverged;
      break;
    }

    Vector p;
    double delta_used = 0.0;
    bool regularization_failed = false;
    int sigma_bumps = 0;
    for (;;) {
      try {
        if (plus) {
          plus_state->refresh(k_op, sigma);
          if (cfg.delta_mode == DeltaMode::kCheapFormula && last_s.size() == n)
            plus_state->ensure_positive_definite_cheap(last_s, last_u, last_v, cfg.delta_eps);
          else
            plus_state->ensure_positive_definite();
          delta_used = plus_state->delta();
          p = plus_state->solve(g);
        } else {
          minus_state->set_sigma(sigma);
          p = minus_state->search_direction(g);
        }
        break;
      } catch (const SingularMiddleMatrix&) {
        if (history.size() == 0) {
          p = -g;
          break;
        }
        history.drop_oldest();
      } catch (const SingularTriangular&) {
        if (history.size() == 0) {
          p = -g;
          break;
        }
        history.drop_oldest();
      } catch (const InitNotPD&) {
        if (++sigma_bumps > 12) {
          regularization_failed = true;
          p = -g;
          break;
        }
        sigma = sigma < 1.0 ? 1.0 : 10.0 * sigma;
      } catch (const RegularizationFailed&) {
        // Pathological state: fall back to steepest descent for this
        // iteration; the run fails with regularization-failure only when
        // that rescue step cannot be taken either.
        regularization_failed = true;
        p = -g;
        break;
      }
    }

    const StepResult step = strong_wolfe_structured(problem, x, f, g, gu, p, wolfe);
    report.f_evals += step.evals;
    report.g_evals += step.evals;
    if (step.status != LineSearchStatus::kConverged) {
      report.status = regularization_failed ? RunStatus::kRegularizationFailure
                                            : RunStatus::kLineSearchFailure;
      break;
    }

    const Vector u_hat = step.grad_u_new - gu;
    x = step.x_new;
    f = step.f_new;
    g = step.g_new;
    gu = step.grad_u_new;
    if (plus || operator_init) k_op = step.k_new;

    if (history.accepts(step.s, step.u)) {
      if (plus)
        history.push(step.s, step.u, step.v);
      else
        history.push(step.s, step.u);
      last_s = step.s;
      last_u = step.u;
      last_v = step.v;
    } else {
      ++report.rejected_pairs;
    }

    sigma = sigma_next(cfg.sigma_strategy, sigma, step.s, step.u, u_hat, cfg.sigma_min);
    report.iterations = k + 1;
    report.trace.push_back(
        {k + 1, f, gnorm(g), step.alpha, sigma, delta_used, step.s.dot(step.u)});
    if (observer) observer(k + 1, x);
  }

  if (report.status == RunStatus::kMaxIters && gnorm(g) <= cfg.epsilon)
    report.status = RunStatus::kConverged;
  return finish(report.status);
}

}  // namespace slbfgs
