#include "oracle_suite/oracle_suite.hpp"

#include "rismec/armijo.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rismec;

TEST(Armijo, Rosenbrock) {
  const auto r = oracles::check_armijo_rosenbrock();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Armijo, Quadratic) {
  rmat A(2, 2);
  A << 3, 1, 1, 2;
  rvec b(2);
  b << 1, -1;
  auto fg = [&](const rvec& x, rvec* g) {
    if (g) *g = A * x - b;
    return 0.5 * x.dot(A * x) - b.dot(x);
  };
  const ArmijoResult r = armijo_descent(fg, rvec::Zero(2));
  EXPECT_EQ(r.status, ArmijoStatus::converged);
  EXPECT_LT((r.x - A.ldlt().solve(b)).norm(), 1e-5);
}

TEST(Armijo, EndsBelowStart) {
  auto fg = [](const rvec& x, rvec* g) {
    if (g) {
      (*g)[0] = 4 * std::pow(x[0] - 1, 3);
      (*g)[1] = std::sinh(x[1]);
    }
    return std::pow(x[0] - 1, 4) + std::cosh(x[1]);
  };
  rvec x0(2);
  x0 << -2.0, 3.0;
  const ArmijoResult r = armijo_descent(fg, x0);
  EXPECT_LE(r.f, fg(x0, nullptr));
  EXPECT_EQ(r.f, fg(r.x, nullptr));
  EXPECT_NEAR(r.x[1], 0.0, 1e-5);
  EXPECT_NEAR(r.f, 1.0, 1e-6);
}

TEST(Armijo, BacktracksOutOfDomain) {
  // -log x + x, minimum at 1; big steps leave the domain
  auto fg = [](const rvec& x, rvec* g) {
    if (x[0] <= 0) return std::numeric_limits<double>::infinity();
    if (g) (*g)[0] = -1.0 / x[0] + 1.0;
    return -std::log(x[0]) + x[0];
  };
  ArmijoOptions o;
  o.initial_step = 100.0;
  const ArmijoResult r = armijo_descent(fg, rvec::Constant(1, 0.05), o);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
}

TEST(Armijo, NanAborts) {
  auto fg = [](const rvec& x, rvec* g) {
    if (g) (*g)[0] = 1.0;
    return x[0] < 0.5 ? std::nan("") : x[0];
  };
  const ArmijoResult r = armijo_descent(fg, rvec::Constant(1, 1.0));
  EXPECT_EQ(r.status, ArmijoStatus::aborted);
  EXPECT_FALSE(r.diagnostic.empty());
}
