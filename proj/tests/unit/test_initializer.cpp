#include "fixtures.hpp"

#include "rismec/initializer.hpp"

#include <gtest/gtest.h>

using namespace rismec;

TEST(Initializer, FeasiblePointsAreClean) {
  int feasible = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto t = rismec::testing::desk_trial(seed, 0.0);
    const InitResult r = find_feasible(t.cfg, t.ch, seed);
    if (!r.feasible) continue;
    ++feasible;
    EXPECT_GE(constraint_report(r.state, t.cfg, t.ch).min_residual(), -1e-6) << seed;
    EXPECT_EQ(infeasibility_hinge(r.state, t.cfg, t.ch), 0.0);
    ASSERT_TRUE(r.derived_budget.has_value());
    EXPECT_NEAR(*r.derived_budget, 2.0 * group_norm(r.state), 1e-12 * *r.derived_budget);
  }
  EXPECT_GE(feasible, 6);
}

TEST(Initializer, Deterministic) {
  const auto t = rismec::testing::desk_trial(3, 0.0);
  const InitResult a = find_feasible(t.cfg, t.ch, 3);
  const InitResult b = find_feasible(t.cfg, t.ch, 3);
  EXPECT_EQ(a.state.a, b.state.a);
  EXPECT_EQ(a.state.theta_dl, b.state.theta_dl);
  EXPECT_EQ(a.rounds, b.rounds);
}

TEST(Initializer, GivenBudgetIsNotReplaced) {
  auto t = rismec::testing::desk_trial(2, 0.0);
  t.cfg.group_budget = 5.0;
  const InitResult r = find_feasible(t.cfg, t.ch, 2);
  EXPECT_FALSE(r.derived_budget.has_value());
}

TEST(Initializer, AllowedMaskIsRespected) {
  const auto t = rismec::testing::desk_trial(6, 0.0);
  InitOptions o;
  BoolMat mask = BoolMat::Constant(t.cfg.N(), t.cfg.K(), false);
  for (int k = 0; k < t.cfg.K(); ++k) mask(k % t.cfg.N(), k) = true;
  o.allowed = mask;
  const InitResult r = find_feasible(t.cfg, t.ch, 6, o);
  const Association as = association(r.state);
  EXPECT_FALSE((as.serving && !mask).any());
}

TEST(Initializer, PhasesInRange) {
  const SystemConfig c = SystemConfig::desk_defaults();
  const rvec th = initial_phases(c, 9, Direction::downlink);
  ASSERT_EQ(th.size(), c.M());
  EXPECT_GE(th.minCoeff(), 0.0);
  EXPECT_LT(th.maxCoeff(), 2 * std::numbers::pi);
  EXPECT_NE(th, initial_phases(c, 9, Direction::uplink));
}

TEST(Initializer, CompleteStateShrinksRate) {
  const auto t = rismec::testing::desk_trial(4, 0.0);
  const InitResult r = find_feasible(t.cfg, t.ch, 4);
  ASSERT_TRUE(r.feasible);
  SolutionState s = r.state;
  const Association as = association(s);
  complete_state(s, t.cfg, t.ch, as.serving, 0.5);
  const ConstraintReport rep = constraint_report(s, t.cfg, t.ch);
  for (int n = 0; n < t.cfg.N(); ++n)
    for (int k = 0; k < t.cfg.K(); ++k)
      if (as.serving(n, k)) EXPECT_GT(rep.rate_floor(n, k), 0.0);
}
