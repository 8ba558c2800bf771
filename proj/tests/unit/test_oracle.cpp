#include "fixtures.hpp"
#include "oracle_suite/oracle_suite.hpp"

#include "rismec/oracle.hpp"

#include <gtest/gtest.h>

using namespace rismec;

TEST(AmEs, AssociationCount) {
  const auto r = oracles::check_association_count();
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_EQ(enumerate_associations(3, 3, true).size(), 343u);
  EXPECT_EQ(enumerate_associations(3, 3, false).size(), 512u);
  EXPECT_EQ(enumerate_associations(2, 2, true).size(), 9u);
  EXPECT_THROW(enumerate_associations(5, 5, true), std::invalid_argument);
}

TEST(AmEs, EnumerationOrderAndContent) {
  const auto all = enumerate_associations(2, 2, false);
  ASSERT_EQ(all.size(), 16u);
  EXPECT_EQ(all.front().count(), 0);
  EXPECT_EQ(all.back().count(), 4);
  for (const Association& a : enumerate_associations(2, 3, true))
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(a.any_for_user(k));
}

TEST(AmEs, BeatsOrMatchesProposedOnTinyCase) {
  SystemConfig c = rismec::testing::small_config(2, 2, 2, 2);
  c.set_uniform_sinr_target(1.0);
  const Geometry g = place_network(c, child_seed(3, 1));
  const ChannelSet ch = generate_channels(c, g, child_seed(3, 2));
  AmEsOptions o;
  o.driver = desk_driver_options();
  const AmEsResult es = am_es_solve(c, ch, 3, o);
  EXPECT_TRUE(es.complete);
  EXPECT_EQ(es.evaluated, 9);
  const SolveResult p = solve(c, ch, o.driver, 3);
  if (es.feasible && p.feasible) EXPECT_GE(es.ce, 0.9 * p.ce);
  if (es.feasible) EXPECT_FALSE((association(es.state).serving && !es.association.serving).any());
}

TEST(AmEs, DeadlineCutsEnumeration) {
  SystemConfig c = rismec::testing::small_config(2, 2, 2, 2);
  const ChannelSet ch = generate_channels(c, place_network(c, 5), 6);
  AmEsOptions o;
  o.deadline_s = 0.0;
  const AmEsResult es = am_es_solve(c, ch, 3, o);
  EXPECT_FALSE(es.complete);
  EXPECT_LT(es.evaluated, 9);
}

TEST(GridOracle, ReturnsWrappedPhases) {
  Rng rng(4);
  const auto in = oracles::random_instance(rng, 2, 2, 2, 1);
  const GridPhaseResult g = grid_phase_oracle(in.s, in.cfg, in.ch, 1.0, Direction::downlink);
  ASSERT_EQ(g.theta.size(), 1);
  EXPECT_GE(g.theta[0], 0.0);
  EXPECT_LT(g.theta[0], 2 * std::numbers::pi);
  EXPECT_NEAR(g.value, min_soc_slack(g.theta, in.s, in.cfg, in.ch), 1e-9 * std::abs(g.value));
}
