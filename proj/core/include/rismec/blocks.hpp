#pragma once

#include "rismec/model.hpp"

#include <optional>
#include <string>

namespace rismec {

struct BlockOptions {
  double w = 1.0;                 // barrier weight
  std::optional<BoolMat> allowed; // pairs that may serve at all (N x K)
  bool group_budget_active = true;
  double inner_tol = 1e-4;
  int inner_max = 50;
};

enum class BlockStatus { accepted, rejected, skipped, failed };
std::string to_string(BlockStatus s);

struct BlockResult {
  BlockStatus status = BlockStatus::skipped;
  double before = std::numeric_limits<double>::quiet_NaN();
  double after = std::numeric_limits<double>::quiet_NaN();
  int inner_iters = 0;
  std::string detail;
};

/// Current association intersected with opts.allowed.
Association serving_set(const SolutionState& s, const BlockOptions& opts);

// --- downlink beamformers -------------------------------------------------

/// Convex relaxation of the downlink beamforming subproblem. Only currently
/// serving groups carry variables; groups whose downlink beamformer vanishes
/// are switched off (both directions zeroed) and the survivors re-solved.
/// Accepted only if the P2 ratio does not decrease.
BlockResult update_downlink_beamformers(SolutionState& s, const SystemConfig& cfg,
                                        const ChannelSet& ch, const BlockOptions& opts);

// --- edge frequencies -----------------------------------------------------

BlockResult update_frequencies(SolutionState& s, const SystemConfig& cfg,
                               const BlockOptions& opts);

// --- uplink beamformers ---------------------------------------------------

/// s*[n][k] for serving pairs (0 elsewhere); throws DomainError on a zero
/// beamformer or vanishing interference-plus-noise term.
std::vector<std::vector<cd>> optimal_s(const SolutionState& s, const SystemConfig& cfg,
                                       const ChannelSet& ch, const Association& assoc);

/// Quadratic-transform surrogate of 1 + SINR_nk at auxiliary value sv:
/// 1 + 2 Re(conj(sv) sqrt(p_k) iota^H v) - |sv|^2 v^H B v.
double uplink_qt_surrogate(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                           int n, int k, cd sv);

BlockResult update_uplink_beamformers(SolutionState& s, const SystemConfig& cfg,
                                      const ChannelSet& ch, const BlockOptions& opts);

// --- uplink phases --------------------------------------------------------

/// (1/w) sum over serving pairs of log(R_nk(theta) - r_k); -inf off-domain.
double uplink_phase_objective(const SolutionState& s, const SystemConfig& cfg,
                              const ChannelSet& ch, const Association& assoc, double w,
                              const rvec& theta_ul);

/// Analytic gradient of uplink_phase_objective with respect to theta_ul.
rvec uplink_phase_gradient(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                           const Association& assoc, double w, const rvec& theta_ul);
double uplink_phase_gradient(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                             double w, int m);

BlockResult update_uplink_phases(SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                                 const BlockOptions& opts);

// --- power partition ------------------------------------------------------

/// o*[n][k] = sqrt(a_k P_k) |v^H iota_nk| / I_nk for serving pairs, 0 elsewhere.
rmat optimal_o(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
               const Association& assoc);

/// Quadratic-transform surrogate of 1 + SINR_nk in the partition step at ov:
/// 1 + 2 ov sqrt(a_k P_k) |v^H iota_nk| - ov^2 I_nk.
double partition_qt_surrogate(const SolutionState& s, const SystemConfig& cfg,
                              const ChannelSet& ch, int n, int k, double ov);

/// Largest a_k allowed by the latency constraints at the current (r, f).
double partition_latency_cap(const SolutionState& s, const SystemConfig& cfg,
                             const Association& assoc, int k);

BlockResult update_power_partition(SolutionState& s, const SystemConfig& cfg,
                                   const ChannelSet& ch, const BlockOptions& opts);

// --- rates and times ------------------------------------------------------

/// Dinkelbach ratio: P2 numerator over the full P2 power (the value of
/// p2_objective). Throws DomainError on a vanishing denominator.
double optimal_z(const SolutionState& s, const SystemConfig& cfg, const Association& assoc);

/// Residual surrogate -|N - z D|, maximized (= 0) exactly at z*.
double dinkelbach_surrogate(const SolutionState& s, const SystemConfig& cfg,
                            const Association& assoc, double z);

BlockResult update_rate_time(SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                             const BlockOptions& opts);

}  // namespace rismec
