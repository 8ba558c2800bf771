// ris_mec: experiment runner and oracle checks.

#include "CLI11.hpp"
#include "oracle_suite/oracle_suite.hpp"

#include "rismec/config_io.hpp"
#include "rismec/experiment.hpp"
#include "rismec/results.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <tuple>

namespace {

using namespace rismec;

// Fails early instead of after a long run.
void check_writable(const std::string& path) {
  const bool existed = std::filesystem::exists(path);
  {
    std::ofstream probe(path, std::ios::app);
    if (!probe) throw std::runtime_error("cannot write output '" + path + "'");
  }
  if (!existed) std::filesystem::remove(path);
}

void print_summary(const ExperimentSpec& spec, const ExperimentOutput& out) {
  std::cout << to_string(spec.id) << ": " << spec.trials << " trials, seed " << spec.seed << "\n";
  struct Acc {
    int trials = 0, feasible = 0;
    double ce_sum = 0.0;
    double wall = 0.0;
  };
  // (mode, sweep_var, sweep), numeric order on the sweep value
  std::map<std::tuple<std::string, std::string, double>, Acc> acc;
  for (const ResultRow& r : out.table.raw()) {
    Acc& a = acc[{r.mode, r.sweep_var, r.sweep}];
    if (r.metric == "feasible") {
      ++a.trials;
      if (r.value > 0.5) ++a.feasible;
    }
    if (r.metric == "ce" && std::isfinite(r.value)) a.ce_sum += r.value;
  }
  for (const TrialTiming& t : out.timing)
    if (spec.id != ExperimentId::convergence_trace)
      acc[{t.mode, t.sweep_var, t.sweep}].wall += t.wall_s;
  for (const auto& [key, a] : acc) {
    const std::string point = std::get<1>(key) + "=" + format_value(std::get<2>(key));
    std::printf("  %-28s %-22s feasible %3d/%-3d  mean CE %s", std::get<0>(key).c_str(), point.c_str(),
                a.feasible, a.trials,
                a.feasible ? format_value(a.ce_sum / a.feasible).c_str() : "nan");
    if (a.trials && spec.id != ExperimentId::convergence_trace)
      std::printf("  mean wall %.3gs", a.wall / a.trials);
    std::printf("\n");
  }
}

void write_timing(const std::vector<TrialTiming>& timing, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "mode,sweep_var,sweep,trial,wall_s\n";
  for (const TrialTiming& t : timing)
    out << t.mode << ',' << t.sweep_var << ',' << format_value(t.sweep) << ',' << t.trial << ','
        << format_value(t.wall_s) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-aided cooperative MEC solver and experiment harness"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment and write a CSV table");
  std::string exp_name, config_path, out_path, timing_path;
  std::optional<int> trials, threads;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
  run->add_option("--experiment", exp_name, "Experiment id")->required();
  run->add_option("--config", config_path, "YAML config (defaults used when omitted)");
  run->add_option("--out", out_path, "Output CSV path")->required();
  run->add_option("--trials", trials, "Override the trial count");
  run->add_option("--seed", seed, "Override the root seed");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_option("--timing", timing_path, "Also write per-trial wall times here");
  run->add_flag("--paper-scale", paper_scale, "Paper counts, noise and trial number");

  auto* validate = app.add_subcommand("validate", "Check a config file");
  std::string validate_path;
  validate->add_option("--config", validate_path, "YAML config")->required();

  auto* suite = app.add_subcommand("oracle-suite", "Run the reference checks and write a table");
  std::string suite_out;
  std::uint64_t suite_seed = 7;
  suite->add_option("--out", suite_out, "Output CSV path")->required();
  suite->add_option("--seed", suite_seed, "Root seed of the random instances");

  auto* dump = app.add_subcommand("dump-config", "Print the default config of an experiment");
  std::string dump_name;
  bool dump_paper = false;
  dump->add_option("--experiment", dump_name, "Experiment id")->required();
  dump->add_flag("--paper-scale", dump_paper, "Paper-scale defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentId id;
      try {
        id = parse_experiment_id(exp_name);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      ExperimentSpec spec;
      try {
        spec = config_path.empty() ? default_spec(id) : load_spec(config_path, id);
        if (paper_scale) apply_paper_scale(spec);
        if (trials) spec.trials = *trials;
        if (seed) spec.seed = *seed;
        if (threads) spec.threads = *threads;
        spec.validate();
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      check_writable(out_path);
      if (!timing_path.empty()) check_writable(timing_path);
      const ExperimentOutput out = run_experiment(spec);
      emit_results(out.table, out_path);
      if (!timing_path.empty()) write_timing(out.timing, timing_path);
      print_summary(spec, out);
      std::cout << "wrote " << out.table.rows.size() << " rows to " << out_path << "\n";
      return 0;
    }
    if (*validate) {
      try {
        const ExperimentSpec spec = load_spec(validate_path);
        std::cout << "ok: " << to_string(spec.id) << ", N=" << spec.base.N()
                  << " K=" << spec.base.K() << " L=" << spec.base.L() << " M=" << spec.base.M()
                  << ", " << spec.trials << " trials, " << spec.modes.size() << " modes\n";
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      return 0;
    }
    if (*suite) {
      check_writable(suite_out);
      const auto results = oracles::run_all(suite_seed);
      std::ofstream out(suite_out, std::ios::trunc);
      out << oracles::to_csv(results);
      if (!out) throw std::runtime_error("write to '" + suite_out + "' failed");
      int failed = 0;
      for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        failed += !r.passed;
      }
      std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
      return failed ? 1 : 0;
    }
    if (*dump) {
      std::cout << dump_spec(default_spec(parse_experiment_id(dump_name), dump_paper));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
