#include "block_common.hpp"

#include <Eigen/Cholesky>

namespace rismec {

using namespace detail;

std::vector<std::vector<cd>> optimal_s(const SolutionState& s, const SystemConfig& cfg,
                                       const ChannelSet& ch, const Association& assoc) {
  const ChannelTable iota = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  std::vector<std::vector<cd>> out(cfg.N(), std::vector<cd>(cfg.K(), cd(0.0)));
  for (int n = 0; n < cfg.N(); ++n)
    for (int k = 0; k < cfg.K(); ++k) {
      if (!assoc.serving(n, k)) continue;
      const cvec& v = s.v_ul[n][k];
      if (v.squaredNorm() == 0.0)
        throw DomainError("optimal_s: zero receive beamformer at (" + std::to_string(n) + ", " +
                          std::to_string(k) + ")");
      const double I = uplink_interference(s, cfg, iota, n, k);
      if (!(I > 1e-30)) throw DomainError("optimal_s: vanishing interference-plus-noise term");
      out[n][k] = std::sqrt(uplink_power(s, cfg, k)) * iota[n][k].dot(v) / I;
    }
  return out;
}

double uplink_qt_surrogate(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                           int n, int k, cd sv) {
  const ChannelTable iota = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  const cd proj = iota[n][k].dot(s.v_ul[n][k]);  // iota^H v
  const double I = uplink_interference(s, cfg, iota, n, k);
  return 1.0 + 2.0 * (std::conj(sv) * std::sqrt(uplink_power(s, cfg, k)) * proj).real() -
         std::norm(sv) * I;
}

BlockResult update_uplink_beamformers(SolutionState& s, const SystemConfig& cfg,
                                      const ChannelSet& ch, const BlockOptions& opts) {
  BlockResult res;
  const Association assoc = serving_set(s, opts);
  res.before = safe_barrier(s, cfg, ch, assoc, opts.w);
  if (assoc.count() == 0) {
    res.after = res.before;
    res.detail = "no serving pairs";
    return res;
  }
  const ChannelTable iota = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  SolutionState cand = s;

  // Alternate s* and the maximizer of the surrogate. With s fixed the
  // surrogate is maximized along B^{-1} iota; the SINR does not depend on the
  // scale, so the incumbent norm is kept and the group budget is untouched.
  double prev = res.before;
  for (int it = 0; it < opts.inner_max; ++it) {
    res.inner_iters = it + 1;
    std::vector<std::vector<cd>> sv;
    try {
      sv = optimal_s(cand, cfg, ch, assoc);
    } catch (const DomainError& e) {
      res.status = BlockStatus::failed;
      res.detail = e.what();
      return res;
    }
    for (int n = 0; n < cfg.N(); ++n)
      for (int k = 0; k < cfg.K(); ++k) {
        if (!assoc.serving(n, k)) continue;
        const double pk = uplink_power(cand, cfg, k);
        if (!(pk > 0.0) || std::abs(sv[n][k]) == 0.0) continue;
        const cmat B = uplink_covariance(cand, cfg, iota, n, k);
        // argmax of 2 Re(conj(s) sqrt(p) iota^H v) - |s|^2 v^H B v
        const cvec v = (std::sqrt(pk) * sv[n][k] / std::norm(sv[n][k])) *
                       B.ldlt().solve(iota[n][k]);
        const double nv = v.norm();
        if (!(nv > 0.0) || !v.allFinite()) continue;
        cand.v_ul[n][k] = v * (s.v_ul[n][k].norm() / nv);
      }
    const double cur = safe_barrier(cand, cfg, ch, assoc, opts.w);
    const bool small = std::abs(cur - prev) <= opts.inner_tol * std::max(1.0, std::abs(prev));
    prev = cur;
    if (small) break;
  }
  res.after = safe_barrier(cand, cfg, ch, assoc, opts.w);
  if (!not_worse(res.after, res.before)) {
    res.status = BlockStatus::rejected;
    return res;
  }
  s = std::move(cand);
  res.status = BlockStatus::accepted;
  return res;
}

}  // namespace rismec
