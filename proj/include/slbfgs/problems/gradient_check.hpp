#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "slbfgs/structured_problem.hpp"
#include "slbfgs/types.hpp"

// Central-difference validation of the analytic gradients of a structured
// problem. For dimensions above 2000 a seeded random subset of 2000
// coordinates is checked.

namespace slbfgs {

struct GradCheckResult {
  double max_rel_error = 0.0;  ///< max_i |fd_i - g_i| / max(1, |g|_inf)
  Index worst_coordinate = -1;
  Index checked_coordinates = 0;
};

/// Compares the analytic gradient of f = k + u against central differences
/// with step h (default 1e-6 * max(1, |x|_inf)). The error is normalized by
/// max(1, |grad|_inf).
inline GradCheckResult fd_gradient_check(const StructuredProblem& problem, const Vector& x,
                                         double h = 0.0, std::uint64_t seed = 0) {
  const Index n = problem.dim();
  detail::require(x.size() == n, "fd_gradient_check: x length does not match dimension");
  if (h <= 0.0) h = 1e-6 * std::max(1.0, x.lpNorm<Eigen::Infinity>());

  const Vector grad = problem.eval_grad(x);
  const double scale = std::max(1.0, grad.lpNorm<Eigen::Infinity>());

  std::vector<Index> coords;
  constexpr Index kMaxCoords = 2000;
  if (n <= kMaxCoords) {
    coords.resize(static_cast<std::size_t>(n));
    std::iota(coords.begin(), coords.end(), Index{0});
  } else {
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    coords.assign(all.begin(), all.begin() + kMaxCoords);
    std::sort(coords.begin(), coords.end());
  }

  GradCheckResult result;
  result.checked_coordinates = static_cast<Index>(coords.size());
  Vector probe = x;
  for (Index i : coords) {
    const double xi = x(i);
    probe(i) = xi + h;
    const double f_plus = problem.eval_f(probe);
    probe(i) = xi - h;
    const double f_minus = problem.eval_f(probe);
    probe(i) = xi;
    const double fd = (f_plus - f_minus) / (2.0 * h);
    const double rel = std::abs(fd - grad(i)) / scale;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_coordinate = i;
    }
  }
  return result;
}

}  // namespace slbfgs
