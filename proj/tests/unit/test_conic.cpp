#include "oracle_suite/oracle_suite.hpp"

#include "rismec/conic.hpp"

#include <gtest/gtest.h>

using namespace rismec;

TEST(Conic, RandomLpsMatchVertexEnumeration) {
  const auto r = oracles::check_conic_lp(50, 21);
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_LE(r.worst, 1e-6);
}

TEST(Conic, SocMatchesBisection) {
  const auto r = oracles::check_conic_soc(50, 22);
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_LE(r.worst, 1e-6);
}

TEST(Conic, SmallLpByHand) {
  // max x + y  s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0  ->  (1.6, 1.2)
  ConicBuilder b;
  const int x = b.add_var(), y = b.add_var();
  b.add_nonneg(4.0 - Affine::var(x) - 2.0 * Affine::var(y));
  b.add_nonneg(6.0 - 3.0 * Affine::var(x) - Affine::var(y));
  b.add_nonneg(Affine::var(x));
  b.add_nonneg(Affine::var(y));
  b.set_objective(-Affine::var(x) - Affine::var(y));
  const SolveReport rep = solve_conic(b.build());
  ASSERT_EQ(rep.status, SolveStatus::optimal);
  EXPECT_NEAR(rep.x[x], 1.6, 1e-6);
  EXPECT_NEAR(rep.x[y], 1.2, 1e-6);
  EXPECT_NEAR(b.objective_value(rep.x), -2.8, 1e-6);
}

TEST(Conic, NormBallProjection) {
  // min t s.t. t >= ||(x - 3, y + 4)||, x + y = 0
  ConicBuilder b;
  const int t = b.add_var(), x = b.add_var(), y = b.add_var();
  b.add_soc({Affine::var(t), Affine::var(x) - 3.0, Affine::var(y) + 4.0});
  b.add_equality(Affine::var(x) + Affine::var(y));
  b.set_objective(Affine::var(t));
  const SolveReport rep = solve_conic(b.build());
  ASSERT_EQ(rep.status, SolveStatus::optimal);
  EXPECT_NEAR(rep.x[t], 1.0 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(rep.x[x], 3.5, 1e-5);
}

TEST(Conic, DetectsInfeasible) {
  ConicBuilder b;
  const int x = b.add_var();
  b.add_nonneg(Affine::var(x) - 2.0);
  b.add_nonneg(1.0 - Affine::var(x));
  b.set_objective(Affine::var(x));
  EXPECT_EQ(solve_conic(b.build()).status, SolveStatus::infeasible);
}

TEST(Conic, DetectsUnbounded) {
  ConicBuilder b;
  const int x = b.add_var();
  b.add_nonneg(Affine::var(x));
  b.set_objective(-Affine::var(x));
  EXPECT_EQ(solve_conic(b.build()).status, SolveStatus::unbounded);
}

TEST(Conic, ValidateRejectsBadShapes) {
  ConicProgram p;
  p.c = rvec::Ones(2);
  p.G = rmat::Identity(3, 3);
  p.h = rvec::Ones(3);
  p.n_orthant = 3;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.G = rmat::Identity(3, 2);
  p.soc_dims = {2};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.soc_dims.clear();
  p.c[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Conic, ViolationOfFeasiblePointIsZero) {
  ConicBuilder b;
  const int x = b.add_var(), y = b.add_var();
  b.add_soc({Affine::var(x), Affine::var(y)});
  b.set_objective(Affine::var(x));
  const ConicProgram p = b.build();
  rvec pt(2);
  pt << 2.0, 1.0;
  EXPECT_LE(max_violation(p, pt), 0.0);
  pt << 1.0, 2.0;
  EXPECT_GT(max_violation(p, pt), 0.0);
}
