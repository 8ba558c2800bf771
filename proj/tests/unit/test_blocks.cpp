#include "fixtures.hpp"
#include "oracle_suite/oracle_suite.hpp"

#include "rismec/blocks.hpp"
#include "rismec/initializer.hpp"

#include <gtest/gtest.h>

#include <functional>

using namespace rismec;

TEST(Blocks, UplinkPhaseGradientMatchesDifferences) {
  const auto r = oracles::check_gradient_fd(100, 31);
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_LE(r.worst, 1e-5);
}

TEST(Blocks, SStarIsStationary) {
  const auto r = oracles::check_stationarity_s(100, 32);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Blocks, OStarIsStationary) {
  const auto r = oracles::check_stationarity_o(100, 33);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Blocks, ZStarIsStationary) {
  const auto r = oracles::check_stationarity_z(100, 34);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Blocks, UplinkPhaseMatchesGridForOneElement) {
  const auto r = oracles::check_uplink_phase_grid(20, 35);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Blocks, SurrogateIsTightAtOptimum) {
  Rng rng(36);
  for (int i = 0; i < 10; ++i) {
    const auto in = oracles::random_instance(rng, 2, 2, 2, 3);
    const Association all = association(in.s);
    const auto s = optimal_s(in.s, in.cfg, in.ch, all);
    const rmat o = optimal_o(in.s, in.cfg, in.ch, all);
    for (int n = 0; n < 2; ++n)
      for (int k = 0; k < 2; ++k) {
        const double exact = 1.0 + uplink_sinr(in.s, in.cfg, in.ch, n, k);
        EXPECT_NEAR(uplink_qt_surrogate(in.s, in.cfg, in.ch, n, k, s[n][k]), exact, 1e-9 * exact);
        EXPECT_NEAR(partition_qt_surrogate(in.s, in.cfg, in.ch, n, k, o(n, k)), exact,
                    1e-9 * exact);
      }
    EXPECT_NEAR(dinkelbach_surrogate(in.s, in.cfg, all, optimal_z(in.s, in.cfg, all)), 0.0,
                1e-6);
  }
}

namespace {

using BlockFn = std::function<BlockResult(SolutionState&, const SystemConfig&, const ChannelSet&,
                                          const BlockOptions&)>;

// Every block, started from a feasible initial point, must not lower the barrier
// objective, and a rejected block must leave the state untouched.
void check_block_monotone(const BlockFn& fn, bool plain_ratio) {
  int ran = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto t = rismec::testing::desk_trial(seed, 0.0);
    const InitResult init = find_feasible(t.cfg, t.ch, seed);
    if (!init.feasible) continue;
    SystemConfig cfg = t.cfg;
    cfg.group_budget = init.derived_budget;
    for (double w : {1.0, 30.0}) {
      SolutionState s = init.state;
      BlockOptions opts;
      opts.w = w;
      const Association as = serving_set(s, opts);
      const double before = plain_ratio ? p2_objective(s, cfg, as)
                                        : barrier_objective(s, cfg, t.ch, as, w);
      const SolutionState copy = s;
      const BlockResult r = fn(s, cfg, t.ch, opts);
      const Association as2 = serving_set(s, opts);
      const double after = plain_ratio ? p2_objective(s, cfg, as2)
                                       : barrier_objective(s, cfg, t.ch, as2, w);
      EXPECT_GE(after, before - 1e-8 * std::abs(before)) << "seed " << seed << " w " << w;
      if (r.status != BlockStatus::accepted) {
        EXPECT_EQ(s.a, copy.a);
        EXPECT_EQ(s.theta_ul, copy.theta_ul);
        EXPECT_EQ(s.r, copy.r);
      }
      ++ran;
    }
  }
  EXPECT_GE(ran, 4);
}

}  // namespace

TEST(Blocks, DownlinkNeverLowersRatio) {
  check_block_monotone(update_downlink_beamformers, true);
}
TEST(Blocks, FrequencyMonotone) {
  check_block_monotone([](SolutionState& s, const SystemConfig& c, const ChannelSet&,
                          const BlockOptions& o) { return update_frequencies(s, c, o); },
                       false);
}
TEST(Blocks, UplinkBeamformersMonotone) { check_block_monotone(update_uplink_beamformers, false); }
TEST(Blocks, UplinkPhasesMonotone) { check_block_monotone(update_uplink_phases, false); }
TEST(Blocks, PartitionMonotone) { check_block_monotone(update_power_partition, false); }
TEST(Blocks, RateTimeMonotone) { check_block_monotone(update_rate_time, false); }

TEST(Blocks, PartitionRespectsLatencyCap) {
  const auto t = rismec::testing::desk_trial(4, 0.0);
  const InitResult init = find_feasible(t.cfg, t.ch, 4);
  ASSERT_TRUE(init.feasible);
  SolutionState s = init.state;
  BlockOptions opts;
  opts.w = 10.0;
  update_power_partition(s, t.cfg, t.ch, opts);
  const ConstraintReport rep = constraint_report(s, t.cfg, t.ch);
  EXPECT_GE(rep.latency.minCoeff(), -1e-9);
  EXPECT_GT(rep.partition.minCoeff(), 0.0);
}

TEST(Blocks, OptimalSThrowsOnZeroBeamformer) {
  Rng rng(37);
  auto in = oracles::random_instance(rng, 2, 2, 2, 3);
  const Association all = association(in.s);
  in.s.v_ul[0][0].setZero();
  EXPECT_THROW(optimal_s(in.s, in.cfg, in.ch, all), DomainError);
}
