#pragma once

#include "rismec/am_driver.hpp"
#include "rismec/channelgen.hpp"
#include "rismec/results.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rismec {

enum class ExperimentId {
  feasibility_vs_sinr,
  ce_vs_sinr,
  convergence_trace,
  runtime_vs_size,
  ce_vs_elements,
  partition_vs_distance,
  aps_per_user,
};
std::string to_string(ExperimentId id);
/// Throws std::invalid_argument on an unknown id.
ExperimentId parse_experiment_id(const std::string& name);
std::vector<ExperimentId> all_experiments();

/// Variables a sweep may move: sinr_target_db, n_aps, n_users, n_antennas,
/// n_elements, distance_m (partition_vs_distance), iteration (convergence_trace).
struct Sweep {
  std::string variable;
  std::vector<double> values;
};

struct ExperimentSpec {
  ExperimentId id = ExperimentId::ce_vs_sinr;
  SystemConfig base = SystemConfig::desk_defaults();
  NetworkSpec network;
  FadingSpec fading;
  DriverOptions driver;
  std::vector<Sweep> sweeps;       // aps_per_user carries three, the rest one
  std::vector<std::string> modes;  // SolveMode names plus "am_es"
  int trials = 20;
  std::uint64_t seed = 1;
  int threads = 1;
  // partition_vs_distance
  std::vector<double> series_power_w;  // one curve per P^c
  double fixed_distance_m = 20.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Desk-scale defaults for an experiment; paper_scale restores the paper's
/// counts, noise and trial number.
ExperimentSpec default_spec(ExperimentId id, bool paper_scale = false);
/// Applies --paper-scale on top of a loaded spec.
void apply_paper_scale(ExperimentSpec& spec);

/// Driver options used by desk runs: the paper's penalty schedule with a faster
/// growth factor for Algorithm 1.
DriverOptions desk_driver_options();

/// Geometry for the two-user / two-AP partition sweep: APs drawn as usual, user
/// 0 at `fixed` metres and user 1 at `swept` metres from the RIS.
Geometry partition_geometry(const SystemConfig& cfg, const NetworkSpec& net, double fixed,
                            double swept, std::uint64_t seed);

struct TrialTiming {
  std::string mode;
  std::string sweep_var;
  double sweep = 0.0;
  int trial = 0;
  double wall_s = 0.0;
};

struct ExperimentOutput {
  ResultTable table;             // deterministic
  std::vector<TrialTiming> timing;  // wall clock, kept out of the table
};

/// Monte-Carlo sweep. Every mode of a trial sees the same channels; trial
/// seeds are child_seed(spec.seed, trial). Per-trial failures become rows with
/// feasible = 0 and a NaN CE.
ExperimentOutput run_experiment(const ExperimentSpec& spec);

/// Metric names recorded per (trial, mode, sweep point).
std::vector<std::string> experiment_metrics(const ExperimentSpec& spec, int n_users);

}  // namespace rismec
