#include "fixtures.hpp"

#include "rismec/am_driver.hpp"

#include <gtest/gtest.h>

using namespace rismec;

namespace {
DriverOptions quick() {
  DriverOptions o = desk_driver_options();
  return o;
}
}  // namespace

TEST(Driver, ModesRoundTrip) {
  for (SolveMode m : all_modes()) EXPECT_EQ(parse_mode(to_string(m)), m);
  EXPECT_THROW(parse_mode("fastest"), std::invalid_argument);
  EXPECT_EQ(all_modes().size(), 5u);
}

TEST(Driver, OptionsValidate) {
  DriverOptions o;
  o.growth = 0.5;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}

TEST(Driver, BarrierMonotoneWithinFixedW) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto t = rismec::testing::desk_trial(seed, 0.0);
    const SolveResult r = solve(t.cfg, t.ch, quick(), seed);
    for (const TraceEntry& it : r.trace.iterations)
      for (const BlockRecord& b : it.blocks) {
        const double tol = 1e-8 * std::max(1.0, std::abs(b.barrier_before));
        if (b.name == "v_dl")
          EXPECT_GE(b.p2_after, b.p2_before - tol) << seed;
        else
          EXPECT_GE(b.barrier_after, b.barrier_before - tol) << seed << " " << b.name;
      }
  }
}

TEST(Driver, PenaltyWeightGrows) {
  const auto t = rismec::testing::desk_trial(2, 0.0);
  const DriverOptions o = quick();
  const SolveResult r = solve(t.cfg, t.ch, o, 2);
  ASSERT_GE(r.trace.size(), 2u);
  EXPECT_EQ(r.trace.iterations[0].w, o.w0);
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    EXPECT_NEAR(r.trace.iterations[i].w,
                std::min(o.w_max, r.trace.iterations[i - 1].w * o.growth), 1e-9);
}

TEST(Driver, ConvergedSolutionIsFeasible) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto t = rismec::testing::desk_trial(seed, 0.0);
    const SolveResult r = solve(t.cfg, t.ch, quick(), seed);
    if (r.outcome != SolveOutcome::converged && r.outcome != SolveOutcome::max_outer) continue;
    EXPECT_GE(constraint_report(r.state, r.config, t.ch).min_residual(), -1e-6);
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.ce, computation_efficiency(r.state, r.config, t.ch), 1e-9 * r.ce);
  }
}

TEST(Driver, Deterministic) {
  const auto t = rismec::testing::desk_trial(5, 0.0);
  const SolveResult a = solve(t.cfg, t.ch, quick(), 5);
  const SolveResult b = solve(t.cfg, t.ch, quick(), 5);
  EXPECT_EQ(a.ce, b.ce);
  EXPECT_EQ(a.state.a, b.state.a);
  EXPECT_EQ(a.trace.size(), b.trace.size());
}

TEST(Driver, WithoutCtServesOneApPerUser) {
  const auto t = rismec::testing::desk_trial(3, 0.0);
  const SolveResult r = benchmark_solve(t.cfg, t.ch, SolveMode::without_ct, 3, quick());
  const Association as = association(r.state);
  for (int k = 0; k < t.cfg.K(); ++k) EXPECT_LE(as.serving.col(k).count(), 1);
}

TEST(Driver, WithoutRisIgnoresPhases) {
  const auto t = rismec::testing::desk_trial(3, 0.0);
  const SolveResult r = benchmark_solve(t.cfg, t.ch, SolveMode::without_ris, 3, quick());
  if (!r.feasible) GTEST_SKIP() << "trial infeasible";
  SolutionState s = r.state;
  s.theta_ul.setConstant(1.234);
  s.theta_dl.setConstant(4.321);
  EXPECT_NEAR(computation_efficiency(s, r.config, t.ch.without_ris()), r.ce, 1e-9 * r.ce);
}

TEST(Driver, BestChannelMaskPicksOnePerUser) {
  const auto t = rismec::testing::desk_trial(8);
  const BoolMat m = best_channel_mask(t.cfg, t.ch, rvec::Zero(t.cfg.M()));
  for (int k = 0; k < t.cfg.K(); ++k) EXPECT_EQ(m.col(k).count(), 1);
}

TEST(Driver, DeadlineStopsEarly) {
  const auto t = rismec::testing::desk_trial(2, 0.0);
  DriverOptions o = quick();
  o.deadline_s = 0.0;
  const SolveResult r = solve(t.cfg, t.ch, o, 2);
  EXPECT_EQ(r.outcome, SolveOutcome::deadline);
  EXPECT_LE(r.trace.size(), 1u);
}
