#pragma once

// Umbrella header: limited-memory structured quasi-Newton optimization.

#include "slbfgs/types.hpp"
#include "slbfgs/dense_kernels.hpp"
#include "slbfgs/known_hessian.hpp"
#include "slbfgs/qn_history.hpp"
#include "slbfgs/structured_problem.hpp"
#include "slbfgs/line_search.hpp"
#include "slbfgs/sbfgs_minus.hpp"
#include "slbfgs/sbfgs_plus.hpp"
#include "slbfgs/solver.hpp"
#include "slbfgs/reference_oracles.hpp"
#include "slbfgs/problems/structured_quadratic.hpp"
#include "slbfgs/problems/libsvm.hpp"
#include "slbfgs/problems/logistic.hpp"
#include "slbfgs/problems/poisson_control.hpp"
#include "slbfgs/problems/quartic.hpp"
#include "slbfgs/problems/gradient_check.hpp"
