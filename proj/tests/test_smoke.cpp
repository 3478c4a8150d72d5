// Compile-and-link smoke test: pulls in every public header.

#include <gtest/gtest.h>

#include "slbfgs/bench/config.hpp"
#include "slbfgs/bench/csv.hpp"
#include "slbfgs/bench/profile.hpp"
#include "slbfgs/bench/suite.hpp"
#include "slbfgs/slbfgs.hpp"

TEST(Smoke, HeadersCompileAndBasicObjectsConstruct) {
  slbfgs::QnHistory hist(4, 2, /*with_v=*/true);
  EXPECT_EQ(hist.size(), 0);

  slbfgs::StructuredQuartic quartic(3, /*seed=*/1);
  EXPECT_EQ(quartic.dim(), 3);

  slbfgs::SolverConfig cfg;
  cfg.max_iters = 5;
  const slbfgs::Vector x0 = slbfgs::Vector::Ones(3);
  const auto report = slbfgs::minimize(quartic, x0, cfg);
  EXPECT_GE(report.iterations, 0);
}
