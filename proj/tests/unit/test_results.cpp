#include "rismec/results.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace rismec;

namespace {
ResultTable sample() {
  ResultTable t;
  const double nan = std::nan("");
  t.rows = {
      {"ce_vs_sinr", "full", "sinr_target_db", 10, 1, "ce", 2.5e10},
      {"ce_vs_sinr", "full", "sinr_target_db", 5, 0, "ce", 3.0e10},
      {"ce_vs_sinr", "full", "sinr_target_db", 10, 0, "ce", nan},
      {"ce_vs_sinr", "am_fp", "sinr_target_db", 10, 0, "feasible", 1},
      {"ce_vs_sinr", "full", "sinr_target_db", 10, 2, "ce", 0.1 + 0.2},
  };
  return t;
}
}  // namespace

TEST(Results, FormatShortestRoundTrip) {
  EXPECT_EQ(format_value(0.5), "0.5");
  EXPECT_EQ(format_value(std::nan("")), "nan");
  EXPECT_EQ(format_value(INFINITY), "nan");
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(-1e12, 1e12);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(g);
    EXPECT_EQ(std::stod(format_value(v)), v);
  }
}

TEST(Results, CsvRoundTrip) {
  ResultTable t = sample();
  t.add_aggregates();
  t.sort();
  const ResultTable back = parse_csv(to_csv(t));
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_TRUE(rows_equal(t.rows[i], back.rows[i]));
  EXPECT_EQ(to_csv(back), to_csv(t));
}

TEST(Results, SortPutsAggregatesAfterTrials) {
  ResultTable t = sample();
  t.add_aggregates();
  std::reverse(t.rows.begin(), t.rows.end());
  t.sort();
  EXPECT_EQ(t.rows.front().mode, "am_fp");
  bool seen_mean = false;
  for (const ResultRow& r : t.rows) {
    if (r.mode != "full" || r.sweep != 10) continue;
    if (r.trial == kMeanTrial) seen_mean = true;
    if (r.trial >= 0) EXPECT_FALSE(seen_mean);
  }
  EXPECT_TRUE(seen_mean);
}

TEST(Results, AggregatesSkipNan) {
  ResultTable t = sample();
  t.add_aggregates();
  t.add_aggregates();  // idempotent
  int n_mean = 0;
  for (const ResultRow& r : t.rows)
    if (r.trial == kMeanTrial && r.mode == "full" && r.sweep == 10) {
      ++n_mean;
      EXPECT_DOUBLE_EQ(r.value, (2.5e10 + 0.3) / 2);
    }
  EXPECT_EQ(n_mean, 1);
  EXPECT_EQ(t.raw().size(), sample().rows.size());
}

TEST(Results, MeanStderr) {
  double m, se;
  mean_stderr({1, 2, 3, 4}, m, se);
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_NEAR(se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  mean_stderr({7}, m, se);
  EXPECT_EQ(se, 0.0);
  mean_stderr({}, m, se);
  EXPECT_TRUE(std::isnan(m));
}

TEST(Results, ParseErrorsCarryLineNumber) {
  const std::string bad =
      "experiment,mode,sweep_var,sweep,trial,metric,value\n"
      "ce_vs_sinr,full,sinr_target_db,0,0,ce,1\n"
      "ce_vs_sinr,full,sinr_target_db,zero,0,ce,1\n";
  try {
    parse_csv(bad);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_csv("a,b\n"), std::runtime_error);
}

TEST(Results, EmitAndReadBack) {
  const auto path = std::filesystem::temp_directory_path() / "rismec_results_test.csv";
  ResultTable t = sample();
  emit_results(t, path.string());
  const ResultTable back = read_results(path.string());
  t.sort();
  EXPECT_EQ(to_csv(back), to_csv(t));
  std::filesystem::remove(path);
  EXPECT_THROW(emit_results(t, "/nonexistent-dir/x.csv"), std::runtime_error);
}

TEST(Results, Select) {
  const ResultTable t = sample();
  EXPECT_EQ(t.select("full", "ce").size(), 4u);
  EXPECT_EQ(t.select("am_fp", "ce").size(), 0u);
}
