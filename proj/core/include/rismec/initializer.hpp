#pragma once

#include "rismec/downlink_phase.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace rismec {

/// sum_k |a_k| * max(0, soc_slack_k), read literally from the penalized
/// feasibility problem.
double violation_objective(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch);

/// sum_k |a_k| * max(0, -soc_slack_k): zero iff every offloading user meets its
/// downlink SINR target in SOC form. This is what the AM rounds drive down.
double infeasibility_hinge(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch);

struct InitOptions {
  int max_rounds = 50;
  int stall_rounds = 3;    // rounds without a stall_rel drop in the hinge before giving up
  double stall_rel = 0.01;
  std::optional<BoolMat> allowed;  // pairs that may serve (N x K); all if unset
  PenaltyParams penalty;
};

struct InitResult {
  bool feasible = false;
  SolutionState state;
  int rounds = 0;
  double hinge = 0.0;
  /// 2 x group norm of the returned point when the config leaves the budget unset.
  std::optional<double> derived_budget;
  std::string detail;
};

/// Random phases / partition / downlink beamformers, the remaining variables set
/// from them, then alternating hinge-SOCP and feasibility-only phase rounds
/// until the constraint report is clean. Deterministic in (channels, seed).
InitResult find_feasible(const SystemConfig& cfg, const ChannelSet& ch, std::uint64_t seed,
                         const InitOptions& opts = {});

/// Uniform phases in [0, 2pi) drawn from the initializer's stream.
rvec initial_phases(const SystemConfig& cfg, std::uint64_t seed, Direction dir);

/// Fills v_ul (MMSE), r, f, f_min and t from the current phases, partition and
/// downlink beamformers. Only pairs in `serving` get uplink beamformers and
/// frequencies. r is shrunk by `rate_shrink` below the smallest serving rate.
void complete_state(SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                    const BoolMat& serving, double rate_shrink = 1.0);

}  // namespace rismec
