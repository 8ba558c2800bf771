#pragma once

#include "rismec/am_driver.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rismec {

/// Every N x K serving matrix, in increasing bitmask order (bit n * K + k is
/// serving(n, k)). With require_nonempty, matrices with an empty column are
/// dropped. Throws std::invalid_argument when N * K > 20.
std::vector<Association> enumerate_associations(int n_aps, int n_users, bool require_nonempty);

struct AmEsOptions {
  DriverOptions driver;            // allowed / group budget are overridden per association
  bool require_nonempty = true;
  std::optional<double> deadline_s;  // stop enumerating once exceeded
};

struct AmEsResult {
  bool feasible = false;
  bool complete = false;  // false if the deadline cut the enumeration short
  SolutionState state;
  Association association;
  double ce = 0.0;
  int evaluated = 0;
  int feasible_count = 0;
  double wall_s = 0.0;
};

/// Exhaustive association search: the AM solver is run once per association
/// with beamformers outside it forced to zero and the group budget dropped.
/// Every association uses the same seed.
AmEsResult am_es_solve(const SystemConfig& cfg, const ChannelSet& ch, std::uint64_t seed,
                       const AmEsOptions& opts = {});

struct GridPhaseResult {
  rvec theta;
  double value = 0.0;
};

/// Exhaustive grid over [0, 2pi)^M (M <= 2) at the given resolution. Uplink
/// maximizes the barrier rate sum uplink_phase_objective with w = 1; downlink
/// maximizes min_soc_slack. Ties keep the first grid point.
GridPhaseResult grid_phase_oracle(const SolutionState& s, const SystemConfig& cfg,
                                  const ChannelSet& ch, double resolution_deg, Direction dir);

}  // namespace rismec
