#include "fixtures.hpp"
#include "oracle_suite/oracle_suite.hpp"

#include "rismec/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace rismec;

TEST(Model, MatchesScalarLoops) {
  const auto r = oracles::check_model_loops(100, 11);
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_LE(r.worst, 1e-10);
}

TEST(Model, ClosedFormConstants) {
  const auto r = oracles::check_closed_form_constants();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Model, AmplitudeStaysInRange) {
  const PhaseParams pp;
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i <= 3600; ++i) {
    const double a = amplitude(i * 2 * std::numbers::pi / 3600, pp);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  EXPECT_NEAR(lo, pp.beta_min, 1e-6);
  EXPECT_NEAR(hi, 1.0, 1e-6);
  // minimum sits at phi - pi/2
  EXPECT_NEAR(amplitude(pp.phi - std::numbers::pi / 2, pp), pp.beta_min, 1e-14);
}

TEST(Model, ReflectionDerivativeMatchesDifference) {
  const PhaseParams pp;
  for (double th : {0.1, 1.0, 2.5, 4.0, 6.0}) {
    const double h = 1e-6;
    const cd fd = (reflection(th + h, pp) - reflection(th - h, pp)) / (2 * h);
    EXPECT_LT(std::abs(fd - reflection_derivative(th, pp)), 1e-7) << th;
  }
}

TEST(Model, WrapPhase) {
  for (double th : {-7.0, -0.1, 0.0, 3.0, 6.5, 100.0}) {
    const double w = wrap_phase(th);
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, 2 * std::numbers::pi);
    EXPECT_NEAR(std::remainder(w - th, 2 * std::numbers::pi), 0.0, 1e-12);
  }
}

TEST(Model, RateIncreasesWithSinr) {
  const SystemConfig c = SystemConfig::desk_defaults();
  EXPECT_EQ(rate_from_sinr(0.0, c), 0.0);
  double prev = 0.0;
  for (double g : {0.1, 1.0, 10.0, 1e3}) {
    const double r = rate_from_sinr(g, c);
    EXPECT_GT(r, prev);
    prev = r;
  }
  EXPECT_NEAR(rate_from_sinr(1.0, c), c.bandwidth_hz, 1e-6);
}

TEST(Model, LocalRateDecreasesWithOffloadShare) {
  const SystemConfig c = SystemConfig::desk_defaults();
  EXPECT_GT(local_rate(0.1, c, 0), local_rate(0.5, c, 0));
  EXPECT_NEAR(local_rate(1.0, c, 0), 0.0, 1e-9);
}

TEST(Model, WithoutRisLeavesDirectPath) {
  const auto t = rismec::testing::desk_trial(3);
  const ChannelSet nr = t.ch.without_ris();
  const rvec theta = rvec::Constant(t.cfg.M(), 1.0);
  for (int n = 0; n < t.cfg.N(); ++n)
    for (int k = 0; k < t.cfg.K(); ++k) {
      const cvec e = effective_channel(nr, theta, t.cfg.phase, Direction::uplink, n, k);
      EXPECT_LT((e - nr.h_d_ul[n][k]).norm(), 1e-15 * (1 + e.norm()));
    }
}

TEST(Model, ReportOfRandomInteriorPointIsClean) {
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const auto in = oracles::random_instance(rng, 2, 2, 2, 3);
    const ConstraintReport rep = constraint_report(in.s, in.cfg, in.ch);
    EXPECT_GT(rep.rate_floor.minCoeff(), 0.0);
    EXPECT_GE(rep.partition.minCoeff(), 0.0);
    EXPECT_TRUE(std::isfinite(computation_efficiency(in.s, in.cfg, in.ch)));
  }
}

TEST(Model, ConfigValidationNamesField) {
  SystemConfig c = SystemConfig::desk_defaults();
  c.latency_cap_s = 1.0;
  try {
    c.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("latency_cap_s"), std::string::npos);
  }
}
