#pragma once

// Shared helpers for the block updates. Not installed.

#include "rismec/blocks.hpp"
#include "rismec/conic.hpp"

#include <cmath>
#include <limits>

namespace rismec::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Margins used when solving so that the returned point is strictly feasible.
inline constexpr double kSinrMargin = 1e-5;
inline constexpr double kPowerMargin = 1e-6;
inline constexpr double kBudgetMargin = 1e-6;
inline constexpr double kCapacityMargin = 1e-6;

/// Monotonicity guard; the objectives here are O(1e9) so the slack is relative.
inline bool not_worse(double after, double before, double rel = 1e-12) {
  if (!std::isfinite(after)) return false;
  if (!std::isfinite(before)) return true;
  return after >= before - rel * std::max(1.0, std::abs(before));
}

inline double safe_barrier(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                           const Association& assoc, double w) {
  try {
    return barrier_objective(s, cfg, ch, assoc, w);
  } catch (const DomainError&) {
    return kNegInf;
  }
}

/// Interference-plus-noise seen by receive beamformer v_ul[n][k].
inline double uplink_interference(const SolutionState& s, const SystemConfig& cfg,
                                  const ChannelTable& iota, int n, int k) {
  const cvec& v = s.v_ul[n][k];
  double I = cfg.noise_ap_w * v.squaredNorm();
  for (int l = 0; l < cfg.K(); ++l)
    if (l != k) I += s.a[l] * cfg.user_power_w[l] * std::norm(v.dot(iota[n][l]));
  return I;
}

/// sum_{l != k} p_l iota_l iota_l^H + sigma^2 I
inline cmat uplink_covariance(const SolutionState& s, const SystemConfig& cfg,
                              const ChannelTable& iota, int n, int k) {
  const int L = cfg.L();
  cmat B = cfg.noise_ap_w * cmat::Identity(L, L);
  for (int l = 0; l < cfg.K(); ++l)
    if (l != k) B += s.a[l] * cfg.user_power_w[l] * iota[n][l] * iota[n][l].adjoint();
  return B;
}

/// Adds the real and imaginary parts of conj(coef) * v (v lifted at `base`,
/// re/im adjacent) to `re` and `im`.
inline void add_inner(Affine& re, Affine& im, cd coef, int base, int idx, double scale = 1.0) {
  const double cr = coef.real() * scale, ci = coef.imag() * scale;
  const int vr = base + 2 * idx, vi = vr + 1;
  re.terms.emplace_back(vr, cr);
  re.terms.emplace_back(vi, ci);
  im.terms.emplace_back(vr, -ci);
  im.terms.emplace_back(vi, cr);
}

inline bool usable(const SolveReport& r, double tol = 1e-6) {
  if (r.status == SolveStatus::optimal) return true;
  return r.status == SolveStatus::max_iters && r.x.size() > 0 && r.x.allFinite() &&
         r.max_violation <= tol;
}

inline BoolMat all_pairs(const SystemConfig& cfg) {
  return BoolMat::Constant(cfg.N(), cfg.K(), true);
}

/// Bits each user still offloads after local computing.
inline double offload_bits(const SolutionState& s, const SystemConfig& cfg, int k) {
  return cfg.task_bits - cfg.slot_s * local_rate(s.a[k], cfg, k);
}

}  // namespace rismec::detail
