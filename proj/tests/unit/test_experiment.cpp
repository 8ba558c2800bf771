#include "rismec/config_io.hpp"
#include "rismec/experiment.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace rismec;

namespace {
ExperimentSpec tiny(ExperimentId id) {
  ExperimentSpec s = default_spec(id);
  s.trials = 2;
  return s;
}

std::size_t expected_raw_rows(const ExperimentSpec& s) {
  std::size_t n = 0;
  for (const Sweep& sw : s.sweeps)
    for (double v : sw.values) {
      int K = s.base.K();
      if (sw.variable == "n_users") K = static_cast<int>(v);
      const std::size_t series =
          s.id == ExperimentId::partition_vs_distance ? s.series_power_w.size() : 1;
      n += s.modes.size() * series * s.trials * experiment_metrics(s, K).size();
    }
  return n;
}
}  // namespace

TEST(Experiment, IdsRoundTrip) {
  EXPECT_EQ(all_experiments().size(), 7u);
  for (ExperimentId id : all_experiments()) EXPECT_EQ(parse_experiment_id(to_string(id)), id);
  EXPECT_THROW(parse_experiment_id("fig2"), std::invalid_argument);
}

TEST(Experiment, DefaultsValidate) {
  for (ExperimentId id : all_experiments()) {
    EXPECT_NO_THROW(default_spec(id).validate()) << to_string(id);
    EXPECT_NO_THROW(default_spec(id, true).validate()) << to_string(id);
  }
  const ExperimentSpec p = default_spec(ExperimentId::ce_vs_sinr, true);
  EXPECT_EQ(p.base.N(), 10);
  EXPECT_EQ(p.base.K(), 20);
  EXPECT_EQ(p.base.M(), 20);
  EXPECT_EQ(p.trials, 100);
}

TEST(Experiment, RowCountAndAggregates) {
  ExperimentSpec s = tiny(ExperimentId::ce_vs_sinr);
  s.modes = {"full", "without_ris_ct"};
  s.sweeps[0].values = {0.0, 20.0};
  const ExperimentOutput out = run_experiment(s);
  const auto raw = out.table.raw();
  EXPECT_EQ(raw.size(), expected_raw_rows(s));
  EXPECT_EQ(out.table.rows.size(), raw.size() + 2 * raw.size() / s.trials);
  EXPECT_EQ(out.timing.size(), s.modes.size() * 2 * s.trials);
  // infeasible rows carry NaN metrics
  for (const ResultRow& r : raw)
    if (r.metric == "feasible" && r.value == 0.0)
      for (const ResultRow& q : raw)
        if (q.mode == r.mode && q.sweep == r.sweep && q.trial == r.trial && q.metric == "ce")
          EXPECT_TRUE(std::isnan(q.value));
}

TEST(Experiment, ThreadCountDoesNotChangeTable) {
  ExperimentSpec s = tiny(ExperimentId::ce_vs_sinr);
  s.modes = {"full", "am_fp"};
  s.sweeps[0].values = {0.0, 5.0};
  const std::string one = to_csv(run_experiment(s).table);
  s.threads = 3;
  EXPECT_EQ(to_csv(run_experiment(s).table), one);
  s.seed = 2;
  EXPECT_NE(to_csv(run_experiment(s).table), one);
}

TEST(Experiment, ConvergenceTraceHoldsLastValue) {
  ExperimentSpec s = tiny(ExperimentId::convergence_trace);
  s.trials = 1;
  const ExperimentOutput out = run_experiment(s);
  EXPECT_EQ(out.table.raw().size(), expected_raw_rows(s));
  const auto ce = out.table.select("full", "ce");
  std::map<double, double> by_iter;
  for (const ResultRow& r : ce)
    if (!r.is_aggregate()) by_iter[r.sweep] = r.value;
  EXPECT_EQ(by_iter.size(), 15u);
}

TEST(Experiment, ApsPerUserSweepsThreeVariables) {
  const ExperimentSpec s = default_spec(ExperimentId::aps_per_user);
  std::set<std::string> vars;
  for (const Sweep& sw : s.sweeps) vars.insert(sw.variable);
  EXPECT_EQ(vars, (std::set<std::string>{"n_users", "n_elements", "n_aps"}));
}

TEST(Experiment, ValidationNamesField) {
  ExperimentSpec s = default_spec(ExperimentId::ce_vs_sinr);
  s.modes = {"warp"};
  try {
    s.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("modes"), std::string::npos) << e.what();
  }
  s = default_spec(ExperimentId::partition_vs_distance);
  s.base = SystemConfig::desk_defaults();
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Experiment, PartitionRowsPerPower) {
  ExperimentSpec s = tiny(ExperimentId::partition_vs_distance);
  s.trials = 1;
  s.sweeps[0].values = {20.0, 60.0};
  s.series_power_w = {0.1, 1.0};
  const ExperimentOutput out = run_experiment(s);
  std::set<std::string> modes;
  for (const ResultRow& r : out.table.raw()) modes.insert(r.mode);
  EXPECT_EQ(modes, (std::set<std::string>{"full@pc=0.1", "full@pc=1"}));
  EXPECT_EQ(out.table.raw().size(), expected_raw_rows(s));
}
