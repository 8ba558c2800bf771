#include "rismec/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace rismec {

namespace {

// Aggregates after the numbered trials, mean before stderr.
int trial_rank(int trial) {
  if (trial >= 0) return trial;
  return trial == kMeanTrial ? std::numeric_limits<int>::max() - 1 : std::numeric_limits<int>::max();
}

auto sort_key(const ResultRow& r) {
  return std::make_tuple(std::cref(r.experiment), std::cref(r.mode), std::cref(r.sweep_var),
                         r.sweep, trial_rank(r.trial), std::cref(r.metric));
}

bool row_less(const ResultRow& a, const ResultRow& b) { return sort_key(a) < sort_key(b); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, int line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error("results line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

const char* kHeader = "experiment,mode,sweep_var,sweep,trial,metric,value";

}  // namespace

bool rows_equal(const ResultRow& a, const ResultRow& b) {
  const bool same_value = (std::isnan(a.value) && std::isnan(b.value)) || a.value == b.value;
  return a.experiment == b.experiment && a.mode == b.mode && a.sweep_var == b.sweep_var &&
         a.sweep == b.sweep && a.trial == b.trial && a.metric == b.metric && same_value;
}

void mean_stderr(const std::vector<double>& xs, double& mean, double& se) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (xs.empty()) {
    mean = se = nan;
    return;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  mean = sum / static_cast<double>(xs.size());
  if (xs.size() == 1) {
    se = 0.0;
    return;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(xs.size());
  se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

void ResultTable::sort() { std::stable_sort(rows.begin(), rows.end(), row_less); }

void ResultTable::add_aggregates() {
  std::erase_if(rows, [](const ResultRow& r) { return r.is_aggregate(); });
  using Key = std::tuple<std::string, std::string, std::string, double, std::string>;
  std::map<Key, std::vector<double>> groups;
  for (const ResultRow& r : rows) {
    std::vector<double>& g = groups[{r.experiment, r.mode, r.sweep_var, r.sweep, r.metric}];
    if (std::isfinite(r.value)) g.push_back(r.value);
  }
  for (const auto& [key, xs] : groups) {
    double m = 0.0, se = 0.0;
    mean_stderr(xs, m, se);
    const auto& [e, mode, var, sw, metric] = key;
    rows.push_back({e, mode, var, sw, kMeanTrial, metric, m});
    rows.push_back({e, mode, var, sw, kStderrTrial, metric, se});
  }
}

std::vector<ResultRow> ResultTable::raw() const {
  std::vector<ResultRow> out;
  for (const ResultRow& r : rows)
    if (!r.is_aggregate()) out.push_back(r);
  return out;
}

std::vector<ResultRow> ResultTable::select(const std::string& mode, const std::string& metric) const {
  std::vector<ResultRow> out;
  for (const ResultRow& r : rows)
    if (r.mode == mode && r.metric == metric) out.push_back(r);
  return out;
}

std::string format_value(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const ResultTable& t) {
  std::string out = kHeader;
  out += '\n';
  for (const ResultRow& r : t.rows) {
    std::string trial = r.trial == kMeanTrial     ? "mean"
                        : r.trial == kStderrTrial ? "stderr"
                                                  : std::to_string(r.trial);
    out += r.experiment + ',' + r.mode + ',' + r.sweep_var + ',' + format_value(r.sweep) + ',' +
           trial + ',' + r.metric + ',' + format_value(r.value) + '\n';
  }
  return out;
}

ResultTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::runtime_error("results: missing or unexpected header");
  ResultTable t;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != 7)
      throw std::runtime_error("results line " + std::to_string(n) + ": expected 7 fields");
    ResultRow r;
    r.experiment = f[0];
    r.mode = f[1];
    r.sweep_var = f[2];
    r.sweep = parse_double(f[3], n);
    if (f[4] == "mean") {
      r.trial = kMeanTrial;
    } else if (f[4] == "stderr") {
      r.trial = kStderrTrial;
    } else {
      const auto [p, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), r.trial);
      if (ec != std::errc() || p != f[4].data() + f[4].size() || r.trial < 0)
        throw std::runtime_error("results line " + std::to_string(n) + ": bad trial '" + f[4] + "'");
    }
    r.metric = f[5];
    r.value = parse_double(f[6], n);
    t.rows.push_back(std::move(r));
  }
  return t;
}

void emit_results(const ResultTable& t, const std::string& path) {
  ResultTable sorted = t;
  sorted.sort();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << to_csv(sorted);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

ResultTable read_results(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace rismec
