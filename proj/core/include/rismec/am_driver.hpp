#pragma once

#include "rismec/blocks.hpp"
#include "rismec/initializer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rismec {

enum class SolveMode { full, without_ris, without_ct, without_ris_ct, am_fp };
std::string to_string(SolveMode m);
/// Throws std::invalid_argument on an unknown name.
SolveMode parse_mode(const std::string& name);
std::vector<SolveMode> all_modes();

struct DriverOptions {
  double w0 = 1.0;
  double growth = 3.0;
  double w_max = 1e4;
  double rel_tol = 1e-3;  // relative CE increase between outer sweeps
  int max_outer = 50;
  int max_failures = 3;   // consecutive failed blocks before giving up
  bool feasibility_only_phase = false;
  bool group_budget_active = true;
  std::optional<BoolMat> allowed;
  std::optional<double> deadline_s;  // wall-clock cap, checked between sweeps
  double inner_tol = 1e-4;
  int inner_max = 50;
  PenaltyParams penalty;
  int init_rounds = 50;

  void validate() const;
};

struct BlockRecord {
  std::string name;
  BlockStatus status = BlockStatus::skipped;
  double seconds = 0.0;
  // Recomputed by the driver around the block, not taken from the block itself.
  double barrier_before = 0.0, barrier_after = 0.0;
  double p2_before = 0.0, p2_after = 0.0;
  std::string detail;
};

struct TraceEntry {
  double w = 0.0;
  double barrier = 0.0;
  double ce = 0.0;
  double max_violation = 0.0;
  BoolMat serving;
  std::vector<BlockRecord> blocks;
};

struct SolveTrace {
  std::vector<TraceEntry> iterations;
  std::size_t size() const { return iterations.size(); }
};

enum class SolveOutcome { converged, max_outer, infeasible, aborted, deadline };
std::string to_string(SolveOutcome o);

struct SolveResult {
  SolveOutcome outcome = SolveOutcome::infeasible;
  bool feasible = false;  // final constraint report clean to 1e-6
  SolutionState state;
  SystemConfig config;    // as solved (derived group budget filled in)
  SolveTrace trace;
  double ce = 0.0;
  double min_residual = 0.0;
  double wall_s = 0.0;
  int init_rounds = 0;
  std::string detail;
};

/// Outer log-barrier loop: initializer, then sweeps of
/// v_ul, a, theta_ul, v_dl, f, (r, t), theta_dl with w <- growth * w.
SolveResult solve(const SystemConfig& cfg, const ChannelSet& ch, const DriverOptions& opts,
                  std::uint64_t seed);

/// Best AP per user by uplink effective-channel norm at theta_ul (lowest index
/// on ties), as an N x K mask.
BoolMat best_channel_mask(const SystemConfig& cfg, const ChannelSet& ch, const rvec& theta_ul);

SolveResult benchmark_solve(const SystemConfig& cfg, const ChannelSet& ch, SolveMode mode,
                            std::uint64_t seed, const DriverOptions& base = {});

}  // namespace rismec
