#include "rismec/config_io.hpp"

#include <gtest/gtest.h>

using namespace rismec;

namespace {
std::string error_of(const std::string& yaml) {
  try {
    parse_spec(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST(ConfigIo, Units) {
  EXPECT_NEAR(db_to_lin(10), 10.0, 1e-12);
  EXPECT_NEAR(db_to_lin(0), 1.0, 1e-15);
  EXPECT_NEAR(dbm_to_watt(-80), 1e-11, 1e-24);
  EXPECT_NEAR(dbm_to_watt(30), 1.0, 1e-12);
}

TEST(ConfigIo, DumpParseRoundTrip) {
  for (ExperimentId id : all_experiments())
    for (bool paper : {false, true}) {
      const ExperimentSpec s = default_spec(id, paper);
      const std::string text = dump_spec(s);
      EXPECT_EQ(dump_spec(parse_spec(text)), text) << to_string(id);
    }
}

TEST(ConfigIo, NegativeSinrGridRejected) {
  const std::string msg = error_of(
      "experiment:\n  id: ce_vs_sinr\n  sweep:\n    variable: sinr_target_db\n"
      "    values: [-5, 0, 5]\n");
  EXPECT_NE(msg.find("experiment.sweep.values"), std::string::npos) << msg;
}

TEST(ConfigIo, UnknownKeyNamed) {
  const std::string msg = error_of("experiment:\n  id: ce_vs_sinr\nsystem:\n  n_apps: 3\n");
  EXPECT_NE(msg.find("system.n_apps"), std::string::npos) << msg;
  EXPECT_NE(error_of("experiment:\n  id: ce_vs_sinr\nextra: 1\n"), "");
}

TEST(ConfigIo, BadValuesNamed) {
  EXPECT_NE(error_of("experiment:\n  id: ce_vs_sinr\n  trials: 0\n").find("trials"),
            std::string::npos);
  EXPECT_NE(error_of("experiment:\n  id: ce_vs_sinr\nsystem:\n  n_aps: many\n").find("n_aps"),
            std::string::npos);
  EXPECT_NE(error_of("experiment:\n  id: nope\n"), "");
  EXPECT_NE(error_of("experiment: [1, 2\n"), "");
}

TEST(ConfigIo, IdMismatch) {
  EXPECT_THROW(parse_spec("experiment:\n  id: ce_vs_sinr\n", ExperimentId::aps_per_user),
               ConfigError);
  EXPECT_EQ(parse_spec("system:\n  n_aps: 2\n", ExperimentId::ce_vs_elements).id,
            ExperimentId::ce_vs_elements);
}

TEST(ConfigIo, UnitVariantsAgree) {
  const ExperimentSpec a = parse_spec(
      "experiment:\n  id: ce_vs_sinr\nsystem:\n  noise_user_dbm: -70\n  user_power_w: 0.2\n");
  EXPECT_NEAR(a.base.noise_user_w, 1e-10, 1e-22);
  for (double p : a.base.user_power_w) EXPECT_EQ(p, 0.2);
}

TEST(ConfigIo, MissingFileIsConfigError) {
  EXPECT_THROW(load_spec("/nonexistent/spec.yaml"), ConfigError);
}
