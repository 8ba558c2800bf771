#include "rismec/experiment.hpp"

#include "rismec/model.hpp"
#include "rismec/oracle.hpp"
#include "rismec/rng.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace rismec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<ExperimentId, const char*>>& id_names() {
  static const std::vector<std::pair<ExperimentId, const char*>> names = {
      {ExperimentId::feasibility_vs_sinr, "feasibility_vs_sinr"},
      {ExperimentId::ce_vs_sinr, "ce_vs_sinr"},
      {ExperimentId::convergence_trace, "convergence_trace"},
      {ExperimentId::runtime_vs_size, "runtime_vs_size"},
      {ExperimentId::ce_vs_elements, "ce_vs_elements"},
      {ExperimentId::partition_vs_distance, "partition_vs_distance"},
      {ExperimentId::aps_per_user, "aps_per_user"},
  };
  return names;
}

bool is_count(const std::string& v) {
  return v == "n_aps" || v == "n_users" || v == "n_antennas" || v == "n_elements";
}

bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x); }

void fail(const std::string& field, const std::string& what) {
  throw std::invalid_argument(field + ": " + what);
}

// Resizes the per-user vectors when K changes, keeping the first user's values.
void set_count(SystemConfig& c, const std::string& var, int value) {
  if (var == "n_aps") c.n_aps = value;
  if (var == "n_antennas") c.n_antennas = value;
  if (var == "n_elements") c.n_elements = value;
  if (var == "n_users") {
    const double p = c.user_power_w.empty() ? 0.5 : c.user_power_w.front();
    const double g = c.sinr_target_lin.empty() ? 10.0 : c.sinr_target_lin.front();
    c.n_users = value;
    c.set_uniform_user_power(p);
    c.set_uniform_sinr_target(g);
  }
}

struct Point {
  std::string mode_label;
  std::string sweep_var;
  double sweep = 0.0;
  SystemConfig cfg;
  double power = 0.0;  // partition series, 0 otherwise
};

struct ModeOutcome {
  bool feasible = false;
  double ce = kNaN;
  int iterations = 0;
  SolutionState state;
  SolveTrace trace;
};

ModeOutcome run_mode(const std::string& mode, const SystemConfig& cfg, const ChannelSet& ch,
                     std::uint64_t seed, const DriverOptions& drv) {
  ModeOutcome out;
  if (mode == "am_es") {
    AmEsOptions o;
    o.driver = drv;
    const AmEsResult r = am_es_solve(cfg, ch, seed, o);
    out.feasible = r.feasible;
    out.iterations = r.evaluated;  // associations tried
    if (r.feasible) {
      out.ce = r.ce;
      out.state = r.state;
    }
    return out;
  }
  const SolveResult r = benchmark_solve(cfg, ch, parse_mode(mode), seed, drv);
  out.feasible = r.feasible && r.outcome != SolveOutcome::infeasible;
  out.iterations = static_cast<int>(r.trace.size());
  out.trace = r.trace;
  if (out.feasible) {
    out.ce = r.ce;
    out.state = r.state;
  }
  return out;
}

double mean_aps_per_user(const SolutionState& s) {
  const Association as = association(s);
  int users = 0, links = 0;
  for (int k = 0; k < as.n_users(); ++k)
    if (s.a[k] > 0.0) {
      ++users;
      links += static_cast<int>(as.serving.col(k).count());
    }
  return users ? static_cast<double>(links) / users : kNaN;
}

struct TaskOutput {
  std::vector<ResultRow> rows;
  std::vector<TrialTiming> timing;
};

}  // namespace

std::string to_string(ExperimentId id) {
  for (const auto& [v, n] : id_names())
    if (v == id) return n;
  return "unknown";
}

ExperimentId parse_experiment_id(const std::string& name) {
  for (const auto& [v, n] : id_names())
    if (name == n) return v;
  throw std::invalid_argument("unknown experiment id '" + name + "'");
}

std::vector<ExperimentId> all_experiments() {
  std::vector<ExperimentId> out;
  for (const auto& [v, n] : id_names()) out.push_back(v);
  return out;
}

void ExperimentSpec::validate() const {
  if (trials < 1) fail("experiment.trials", "must be >= 1");
  if (threads < 0) fail("experiment.threads", "must be >= 0");
  if (sweeps.empty()) fail("experiment.sweep", "needs at least one sweep");
  if (modes.empty()) fail("experiment.modes", "needs at least one mode");
  for (const std::string& m : modes)
    if (m != "am_es") try {
        parse_mode(m);
      } catch (const std::invalid_argument&) {
        fail("experiment.modes", "unknown mode '" + m + "'");
      }
  base.validate();
  driver.validate();
  const double min_dist = std::abs(network.ris_pos[2] - network.user_height_m);
  for (const Sweep& s : sweeps) {
    if (s.values.empty()) fail("experiment.sweep.values", "grid is empty");
    const std::string f = "experiment.sweep.values (" + s.variable + ")";
    for (double v : s.values) {
      if (!std::isfinite(v)) fail(f, "must be finite");
      if (s.variable == "sinr_target_db") {
        if (v < 0.0) fail(f, "must be >= 0 dB, got " + format_value(v));
      } else if (is_count(s.variable) || s.variable == "iteration") {
        if (!is_integer(v) || v < 1.0) fail(f, "must be a positive integer");
      } else if (s.variable == "distance_m") {
        if (!(v > min_dist)) fail(f, "must exceed the RIS-to-user height gap");
      } else {
        fail("experiment.sweep.variable", "unknown variable '" + s.variable + "'");
      }
    }
    const bool trace = s.variable == "iteration";
    const bool dist = s.variable == "distance_m";
    if (trace != (id == ExperimentId::convergence_trace))
      fail("experiment.sweep.variable", "'iteration' goes with convergence_trace only");
    if (dist != (id == ExperimentId::partition_vs_distance))
      fail("experiment.sweep.variable", "'distance_m' goes with partition_vs_distance only");
  }
  if (id == ExperimentId::partition_vs_distance) {
    if (base.n_users != 2) fail("system.n_users", "partition_vs_distance needs 2 users");
    if (series_power_w.empty()) fail("experiment.series_power_w", "needs at least one power");
    for (double p : series_power_w)
      if (!(p > 0.0)) fail("experiment.series_power_w", "must be > 0");
    if (!(fixed_distance_m > min_dist))
      fail("experiment.fixed_distance_m", "must exceed the RIS-to-user height gap");
  }
}

DriverOptions desk_driver_options() {
  DriverOptions d;
  d.penalty.growth = 1.03;
  return d;
}

ExperimentSpec default_spec(ExperimentId id, bool paper_scale) {
  ExperimentSpec s;
  s.id = id;
  s.driver = desk_driver_options();
  const std::vector<std::string> five = {"full", "am_fp", "without_ris", "without_ct",
                                         "without_ris_ct"};
  // Outside the SINR sweeps the desk runs sit at 0 dB so nearly every trial is feasible.
  auto at_db = [&](double db) { s.base.set_uniform_sinr_target(std::pow(10.0, db / 10.0)); };
  switch (id) {
    case ExperimentId::feasibility_vs_sinr:
    case ExperimentId::ce_vs_sinr:
      s.modes = five;
      s.sweeps = {{"sinr_target_db", {0, 5, 10, 15, 20}}};
      break;
    case ExperimentId::convergence_trace: {
      s.modes = {"full", "am_fp"};
      Sweep it{"iteration", {}};
      for (int i = 1; i <= 15; ++i) it.values.push_back(i);
      s.sweeps = {it};
      s.trials = 5;
      at_db(0.0);
      break;
    }
    case ExperimentId::runtime_vs_size:
      s.modes = {"full", "am_es"};
      s.base = SystemConfig::desk_defaults();
      set_count(s.base, "n_users", 3);
      s.base.n_elements = 4;
      s.sweeps = {{"n_users", {2, 3}}};
      s.trials = 5;
      at_db(0.0);
      break;
    case ExperimentId::ce_vs_elements:
      s.modes = {"full", "am_fp", "without_ct"};
      s.sweeps = {{"n_elements", {2, 4, 8, 12}}};
      at_db(0.0);
      break;
    case ExperimentId::partition_vs_distance:
      s.modes = {"full"};
      s.base.n_aps = 2;
      set_count(s.base, "n_users", 2);
      s.sweeps = {{"distance_m", {20, 30, 40, 50, 60}}};
      s.series_power_w = {0.1, 0.3, 0.5, 1.0};
      at_db(0.0);
      break;
    case ExperimentId::aps_per_user:
      s.modes = {"full"};
      s.base.n_aps = 5;
      set_count(s.base, "n_users", 10);
      s.base.n_elements = 10;
      s.sweeps = {{"n_users", {4, 6, 8, 10}}, {"n_elements", {4, 6, 8, 10}}, {"n_aps", {2, 3, 4, 5}}};
      s.trials = 5;
      at_db(0.0);
      break;
  }
  if (paper_scale) apply_paper_scale(s);
  return s;
}

void apply_paper_scale(ExperimentSpec& s) {
  const SystemConfig p = SystemConfig::paper_defaults(10, 20, 4, 20);
  s.base.noise_user_w = p.noise_user_w;
  s.base.set_uniform_sinr_target(10.0);
  s.driver.penalty.growth = PenaltyParams{}.growth;
  s.trials = 100;
  switch (s.id) {
    case ExperimentId::partition_vs_distance:
      s.base.n_elements = p.n_elements;
      break;
    case ExperimentId::runtime_vs_size:
      break;  // AM-ES bounds the sizes
    case ExperimentId::aps_per_user:
      s.base.n_aps = p.n_aps;
      set_count(s.base, "n_users", p.n_users);
      s.base.n_elements = p.n_elements;
      s.base.n_antennas = p.n_antennas;
      for (Sweep& sw : s.sweeps)
        for (double& v : sw.values) v *= 2.0;
      break;
    default:
      s.base.n_aps = p.n_aps;
      set_count(s.base, "n_users", p.n_users);
      s.base.n_elements = p.n_elements;
      s.base.n_antennas = p.n_antennas;
      break;
  }
}

Geometry partition_geometry(const SystemConfig& cfg, const NetworkSpec& net, double fixed,
                            double swept, std::uint64_t seed) {
  Geometry g = place_network(cfg, net, seed);
  Rng rng(child_seed(seed, 0x7061));
  // Both users in front of the RIS (y > 0), directions fixed per seed.
  std::uniform_real_distribution<double> ang(std::numbers::pi / 6.0, 5.0 * std::numbers::pi / 6.0);
  const double dz = net.ris_pos[2] - net.user_height_m;
  const double dists[2] = {fixed, swept};
  for (int k = 0; k < 2 && k < cfg.K(); ++k) {
    const double a = ang(rng);
    const double r = std::sqrt(std::max(dists[k] * dists[k] - dz * dz, 0.0));
    g.user_pos[k] = {net.ris_pos[0] + r * std::cos(a), net.ris_pos[1] + r * std::sin(a),
                     net.user_height_m};
  }
  return g;
}

std::vector<std::string> experiment_metrics(const ExperimentSpec& spec, int n_users) {
  if (spec.id == ExperimentId::convergence_trace) return {"barrier", "ce", "feasible"};
  std::vector<std::string> m = {"feasible", "ce", "iterations", "aps_per_user", "a_mean"};
  for (int k = 0; k < n_users; ++k) m.push_back("a_" + std::to_string(k));
  return m;
}

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::string exp = to_string(spec.id);

  // Sweep points; convergence_trace solves once per trial and reads the trace.
  std::vector<Point> points;
  for (const Sweep& sw : spec.sweeps) {
    if (spec.id == ExperimentId::convergence_trace) {
      points.push_back({"", sw.variable, 0.0, spec.base, 0.0});
      break;
    }
    for (double v : sw.values) {
      SystemConfig c = spec.base;
      if (sw.variable == "sinr_target_db") c.set_uniform_sinr_target(std::pow(10.0, v / 10.0));
      if (is_count(sw.variable)) set_count(c, sw.variable, static_cast<int>(v));
      if (spec.id == ExperimentId::partition_vs_distance) {
        for (double p : spec.series_power_w) {
          SystemConfig cp = c;
          cp.set_uniform_user_power(p);
          points.push_back({"@pc=" + format_value(p), sw.variable, v, cp, p});
        }
      } else {
        points.push_back({"", sw.variable, v, c, 0.0});
      }
    }
  }

  const int n_tasks = static_cast<int>(points.size()) * spec.trials;
  std::vector<TaskOutput> outputs(n_tasks);

  auto run_task = [&](int task) {
    const Point& pt = points[task / spec.trials];
    const int trial = task % spec.trials;
    const std::uint64_t tseed = child_seed(spec.seed, static_cast<std::uint64_t>(trial));
    const SystemConfig& cfg = pt.cfg;
    TaskOutput& out = outputs[task];
    const std::vector<std::string> metrics = experiment_metrics(spec, cfg.K());

    ChannelSet ch;
    std::string setup_error;
    try {
      const Geometry geo =
          spec.id == ExperimentId::partition_vs_distance
              ? partition_geometry(cfg, spec.network, spec.fixed_distance_m, pt.sweep,
                                   child_seed(tseed, 1))
              : place_network(cfg, spec.network, child_seed(tseed, 1));
      ch = generate_channels(cfg, geo, spec.fading, child_seed(tseed, 2));
    } catch (const std::exception& e) {
      setup_error = e.what();
    }

    for (const std::string& mode : spec.modes) {
      const std::string label = mode + pt.mode_label;
      ModeOutcome mo;
      const auto t0 = std::chrono::steady_clock::now();
      if (setup_error.empty()) {
        try {
          mo = run_mode(mode, cfg, ch, tseed, spec.driver);
        } catch (const std::exception&) {
          mo = ModeOutcome{};
        }
      }
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      if (spec.id == ExperimentId::convergence_trace) {
        const Sweep& sw = spec.sweeps.front();
        for (double it : sw.values) {
          double ce = kNaN, barrier = kNaN;
          if (mo.feasible && !mo.trace.iterations.empty()) {
            // Past the last sweep the solver has stopped; hold its final values.
            const std::size_t i =
                std::min(static_cast<std::size_t>(it) - 1, mo.trace.iterations.size() - 1);
            ce = mo.trace.iterations[i].ce;
            barrier = mo.trace.iterations[i].barrier;
          }
          out.rows.push_back({exp, label, sw.variable, it, trial, "barrier", barrier});
          out.rows.push_back({exp, label, sw.variable, it, trial, "ce", ce});
          out.rows.push_back({exp, label, sw.variable, it, trial, "feasible", mo.feasible ? 1.0 : 0.0});
        }
        out.timing.push_back({label, sw.variable, 0.0, trial, wall});
        continue;
      }

      for (const std::string& m : metrics) {
        double v = kNaN;
        if (m == "feasible") {
          v = mo.feasible ? 1.0 : 0.0;
        } else if (mo.feasible) {
          if (m == "ce") v = mo.ce;
          if (m == "iterations") v = mo.iterations;
          if (m == "aps_per_user") v = mean_aps_per_user(mo.state);
          if (m == "a_mean") v = mo.state.a.mean();
          if (m.rfind("a_", 0) == 0 && m != "a_mean") v = mo.state.a[std::stoi(m.substr(2))];
        }
        out.rows.push_back({exp, label, pt.sweep_var, pt.sweep, trial, m, v});
      }
      out.timing.push_back({label, pt.sweep_var, pt.sweep, trial, wall});
    }
  };

  int threads = spec.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : spec.threads;
  threads = std::max(1, std::min(threads, n_tasks));
  if (threads == 1) {
    for (int i = 0; i < n_tasks; ++i) run_task(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (int i = next++; i < n_tasks; i = next++) run_task(i);
      });
  }

  // Ordered reduction: task order, then sort.
  ExperimentOutput result;
  for (TaskOutput& o : outputs) {
    result.table.rows.insert(result.table.rows.end(), o.rows.begin(), o.rows.end());
    result.timing.insert(result.timing.end(), o.timing.begin(), o.timing.end());
  }
  result.table.add_aggregates();
  result.table.sort();
  return result;
}

}  // namespace rismec
