#include "fixtures.hpp"
#include "oracle_suite/oracle_suite.hpp"

#include "rismec/downlink_phase.hpp"
#include "rismec/initializer.hpp"

#include <gtest/gtest.h>

using namespace rismec;

TEST(DownlinkPhase, MatchesGridOnTwoElements) {
  const auto r = oracles::check_downlink_phase_grid(10, 41);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(DownlinkPhase, FitMatchesGrid) {
  const auto r = oracles::check_fit_grid(50, 42);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(DownlinkPhase, ThetaMatrixLargeMuReturnsFeasibleProjection) {
  const auto r = oracles::check_theta_matrix_limit(10, 43);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(DownlinkPhase, NeverLowersMinimumSlack) {
  Rng rng(44);
  PenaltyParams pp;
  pp.growth = 1.03;
  for (int i = 0; i < 8; ++i) {
    const auto in = oracles::random_instance(rng, 2, 2, 2, 4);
    const PhaseResult r = solve_downlink_phase(in.s, in.cfg, in.ch, pp);
    EXPECT_GE(r.slack_after, r.slack_before);
    EXPECT_NEAR(min_scaled_soc_slack(r.theta, in.s, in.cfg, in.ch), r.slack_after,
                1e-9 * (1 + std::abs(r.slack_after)));
    for (int m = 0; m < r.theta.size(); ++m) {
      EXPECT_GE(r.theta[m], 0.0);
      EXPECT_LT(r.theta[m], 2 * std::numbers::pi);
    }
  }
}

TEST(DownlinkPhase, FeasibilityOnlyStopsAtFeasiblePoint) {
  const auto t = rismec::testing::desk_trial(5, 0.0);
  const InitResult init = find_feasible(t.cfg, t.ch, 5);
  ASSERT_TRUE(init.feasible);
  const PhaseResult r = solve_downlink_phase(init.state, t.cfg, t.ch, {}, true);
  EXPECT_EQ(r.theta, init.state.theta_dl);
  EXPECT_EQ(r.conic_solves, 0);
}

TEST(DownlinkPhase, MuScheduleGrowsGeometrically) {
  Rng rng(45);
  const auto in = oracles::random_instance(rng, 2, 2, 2, 3);
  PenaltyParams pp;
  pp.growth = 1.5;
  pp.max_outer = 20;
  const PhaseResult r = solve_downlink_phase(in.s, in.cfg, in.ch, pp);
  for (std::size_t i = 1; i < r.mu_trace.size(); ++i)
    EXPECT_NEAR(r.mu_trace[i], r.mu_trace[i - 1] * 1.5, 1e-12 * r.mu_trace[i]);
}

TEST(DownlinkPhase, RejectsBadPenalty) {
  PenaltyParams pp;
  pp.growth = 1.0;
  EXPECT_THROW(pp.validate(), std::invalid_argument);
}

TEST(DownlinkPhase, NoOffloadingUserThrows) {
  Rng rng(46);
  auto in = oracles::random_instance(rng, 2, 2, 2, 3);
  in.s.a.setZero();
  EXPECT_THROW(min_soc_slack(in.s.theta_dl, in.s, in.cfg, in.ch), std::invalid_argument);
}
