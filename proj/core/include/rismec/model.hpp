#pragma once

#include "rismec/types.hpp"

namespace rismec {

/// Relative threshold of the sparsity rule: a group is serving iff its stacked
/// norm exceeds this fraction of the largest group norm.
inline constexpr double kSparsityThreshold = 1e-4;

double amplitude(double theta, const PhaseParams& pp);
/// rho(theta) * exp(j theta)
cd reflection(double theta, const PhaseParams& pp);
/// d/dtheta of rho(theta) * exp(j theta)
cd reflection_derivative(double theta, const PhaseParams& pp);
double wrap_phase(double theta);

cvec effective_channel(const ChannelSet& ch, const rvec& theta, const PhaseParams& pp,
                       Direction dir, int n, int k);

/// iota[n][k] for every pair.
using ChannelTable = std::vector<std::vector<cvec>>;
ChannelTable effective_channels(const ChannelSet& ch, const rvec& theta, const PhaseParams& pp,
                                Direction dir);

double uplink_power(const SolutionState& s, const SystemConfig& cfg, int k);

double uplink_sinr(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch, int n,
                   int k);
double uplink_sinr(const SolutionState& s, const SystemConfig& cfg, const ChannelTable& iota_ul,
                   int n, int k);
double downlink_sinr(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch, int k);
double downlink_sinr(const SolutionState& s, const SystemConfig& cfg, const ChannelTable& iota_dl,
                     int k);

double offload_rate(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch, int n,
                    int k);
double rate_from_sinr(double sinr, const SystemConfig& cfg);
double local_rate(double a_k, const SystemConfig& cfg, int k);

Association association(const SolutionState& s);
double group_norm(const SolutionState& s);

double total_power(const SolutionState& s, const SystemConfig& cfg, const Association& assoc);
double latency(const SolutionState& s, const SystemConfig& cfg, int n, int k);

/// P0 objective with the true per-AP rates (min over serving APs).
double computation_efficiency(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                              const Association& assoc);
double computation_efficiency(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch);

/// Ratio part of the P2 objective (auxiliary rates r_k in the numerator).
double p2_objective(const SolutionState& s, const SystemConfig& cfg, const Association& assoc);
/// P2w objective: p2_objective + (1/w) sum over serving pairs of log(R_nk - r_k).
double barrier_objective(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                         double w);
double barrier_objective(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                         const Association& assoc, double w);

/// RHS - LHS of the SOC form of the downlink SINR constraint for user k.
double soc_slack(const SolutionState& s, const SystemConfig& cfg, const ChannelTable& iota_dl,
                 int k);
double soc_slack(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch, int k);

ConstraintReport constraint_report(const SolutionState& s, const SystemConfig& cfg,
                                   const ChannelSet& ch);

}  // namespace rismec
