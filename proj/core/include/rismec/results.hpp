#pragma once

#include <string>
#include <vector>

namespace rismec {

inline constexpr int kMeanTrial = -1;
inline constexpr int kStderrTrial = -2;

struct ResultRow {
  std::string experiment;
  std::string mode;
  std::string sweep_var;
  double sweep = 0.0;
  int trial = 0;  // >= 0, or kMeanTrial / kStderrTrial for aggregates
  std::string metric;
  double value = 0.0;  // NaN marks "infeasible / not applicable"

  bool is_aggregate() const { return trial < 0; }
};

struct ResultTable {
  std::vector<ResultRow> rows;

  /// Sorted by experiment, mode, sweep_var, sweep, trial (aggregates last), metric.
  void sort();
  /// Drops existing aggregate rows and appends mean / standard error over the
  /// finite per-trial values of every (experiment, mode, sweep, metric) group.
  /// Groups with no finite value get NaN for both.
  void add_aggregates();
  std::vector<ResultRow> raw() const;
  std::vector<ResultRow> select(const std::string& mode, const std::string& metric) const;
};

bool rows_equal(const ResultRow& a, const ResultRow& b);  // NaN == NaN

/// Sample mean and standard error (s / sqrt(n), n - 1 denominator; 0 for n = 1).
void mean_stderr(const std::vector<double>& xs, double& mean, double& se);

std::string format_value(double v);  // shortest round-trip form, "nan" for non-finite
std::string to_csv(const ResultTable& t);
/// Throws std::runtime_error with the line number on malformed input.
ResultTable parse_csv(const std::string& text);

/// Sorts a copy and writes it; throws std::runtime_error naming the path on I/O failure.
void emit_results(const ResultTable& t, const std::string& path);
ResultTable read_results(const std::string& path);

}  // namespace rismec
