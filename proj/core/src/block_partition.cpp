#include "block_common.hpp"

#include <algorithm>
#include <numbers>

namespace rismec {

using namespace detail;

rmat optimal_o(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
               const Association& assoc) {
  const ChannelTable iota = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  rmat o = rmat::Zero(cfg.N(), cfg.K());
  for (int n = 0; n < cfg.N(); ++n)
    for (int k = 0; k < cfg.K(); ++k) {
      if (!assoc.serving(n, k)) continue;
      if (s.v_ul[n][k].squaredNorm() == 0.0)
        throw DomainError("optimal_o: zero receive beamformer");
      const double I = uplink_interference(s, cfg, iota, n, k);
      if (!(I > 1e-30)) throw DomainError("optimal_o: vanishing interference-plus-noise term");
      o(n, k) = std::sqrt(uplink_power(s, cfg, k)) * std::abs(s.v_ul[n][k].dot(iota[n][k])) / I;
    }
  return o;
}

double partition_qt_surrogate(const SolutionState& s, const SystemConfig& cfg,
                              const ChannelSet& ch, int n, int k, double ov) {
  const ChannelTable iota = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  const double c = std::abs(s.v_ul[n][k].dot(iota[n][k]));
  const double I = uplink_interference(s, cfg, iota, n, k);
  return 1.0 + 2.0 * ov * std::sqrt(uplink_power(s, cfg, k)) * c - ov * ov * I;
}

double partition_latency_cap(const SolutionState& s, const SystemConfig& cfg,
                             const Association& assoc, int k) {
  double cap = 1.0;
  const double P = cfg.user_power_w[k];
  for (int n = 0; n < cfg.N(); ++n) {
    if (!assoc.serving(n, k)) continue;
    if (!(s.r[k] > 0.0) || !(s.f_nk(n, k) > 0.0)) return 0.0;
    const double bound = cfg.latency_cap_s / (1.0 / s.r[k] + cfg.cycles_per_bit / s.f_nk(n, k));
    const double need = cfg.task_bits - bound;  // bits that must be computed locally
    if (need <= 0.0) continue;
    const double root = need * cfg.cycles_per_bit * std::sqrt(cfg.kappa_user / P) / cfg.slot_s;
    cap = std::min(cap, 1.0 - root * root);
  }
  return cap;
}

namespace {

// Surrogate pieces for one QT round: everything that does not move with a.
struct PartitionModel {
  int N = 0, K = 0;
  rmat o;                                            // N x K
  std::vector<std::vector<rvec>> proj;               // [n][j] -> |v_nj^H iota_nl|^2 over l
  rmat noise;                                        // sigma^2 ||v_nj||^2
  double ptot = 1.0;
};

double pair_arg(const PartitionModel& pm, const rvec& a, const SystemConfig& cfg, int n, int j) {
  double I = pm.noise(n, j);
  for (int l = 0; l < pm.K; ++l)
    if (l != j) I += a[l] * cfg.user_power_w[l] * pm.proj[n][j][l];
  const double o = pm.o(n, j);
  return 1.0 + 2.0 * o * std::sqrt(a[j] * cfg.user_power_w[j] * pm.proj[n][j][j]) - o * o * I;
}

}  // namespace

BlockResult update_power_partition(SolutionState& s, const SystemConfig& cfg,
                                   const ChannelSet& ch, const BlockOptions& opts) {
  BlockResult res;
  const int N = cfg.N(), K = cfg.K();
  const Association assoc = serving_set(s, opts);
  res.before = safe_barrier(s, cfg, ch, assoc, opts.w);
  if (!std::isfinite(res.before)) {
    res.status = BlockStatus::failed;
    res.detail = "incumbent outside the barrier domain";
    return res;
  }
  const ChannelTable iota = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  const double B = cfg.bandwidth_hz;
  const double ln2 = std::numbers::ln2;
  const double w = opts.w;

  PartitionModel pm;
  pm.N = N;
  pm.K = K;
  pm.proj.assign(N, std::vector<rvec>(K, rvec::Zero(K)));
  pm.noise = rmat::Zero(N, K);
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < K; ++j) {
      if (!assoc.serving(n, j)) continue;
      for (int l = 0; l < K; ++l) pm.proj[n][j][l] = std::norm(s.v_ul[n][j].dot(iota[n][l]));
      pm.noise(n, j) = cfg.noise_ap_w * s.v_ul[n][j].squaredNorm();
    }
  pm.ptot = total_power(s, cfg, assoc);

  rvec a = s.a;
  rvec lat_cap(K);
  for (int k = 0; k < K; ++k) lat_cap[k] = partition_latency_cap(s, cfg, assoc, k);

  for (int it = 0; it < opts.inner_max; ++it) {
    res.inner_iters = it + 1;
    SolutionState at = s;
    at.a = a;
    pm.o = optimal_o(at, cfg, ch, assoc);
    const rvec a_old = a;
    for (int k = 0; k < K; ++k) {
      const double Pk = cfg.user_power_w[k];
      if (!assoc.any_for_user(k)) {
        a[k] = 0.0;
        continue;
      }
      // Domain of the coordinate: own rates above r_k, others' above r_j.
      double lo = 0.0, hi = std::min(1.0, lat_cap[k]);
      bool hi_is_latency = lat_cap[k] < 1.0;
      for (int n = 0; n < N; ++n)
        for (int j = 0; j < K; ++j) {
          if (!assoc.serving(n, j)) continue;
          const double need = std::exp2(s.r[j] / B);
          const double o = pm.o(n, j);
          if (j == k) {
            double I = pm.noise(n, k);
            for (int l = 0; l < K; ++l)
              if (l != k) I += a[l] * cfg.user_power_w[l] * pm.proj[n][k][l];
            const double den = 2.0 * o * std::sqrt(Pk * pm.proj[n][k][k]);
            if (!(den > 0.0)) {
              lo = hi = a[k];
              continue;
            }
            const double root = (need - 1.0 + o * o * I) / den;
            if (root > 0.0) lo = std::max(lo, root * root);
          } else {
            const double slope = o * o * Pk * pm.proj[n][j][k];
            if (slope <= 0.0) continue;
            rvec a0 = a;
            a0[k] = 0.0;
            const double base = pair_arg(pm, a0, cfg, n, j);
            const double cap = (base - need) / slope;
            if (cap < hi) {
              hi = cap;
              hi_is_latency = false;
            }
          }
        }
      if (!(hi > lo)) continue;
      auto deriv = [&](double ak) {
        rvec av = a;
        av[k] = ak;
        double d = -std::sqrt(Pk / cfg.kappa_user) / (cfg.cycles_per_bit * 2.0 *
                                                       std::sqrt(std::max(1.0 - ak, 1e-300)));
        d /= pm.ptot;
        double bar = 0.0;
        for (int n = 0; n < N; ++n)
          for (int j = 0; j < K; ++j) {
            if (!assoc.serving(n, j)) continue;
            const double arg = pair_arg(pm, av, cfg, n, j);
            const double gap = arg > 0.0 ? B * std::log2(arg) - s.r[j] : -1.0;
            // Rounding at the domain edges: point back inside.
            if (!(gap > 0.0)) return j == k ? -kNegInf : kNegInf;
            double darg;
            if (j == k)
              darg = pm.o(n, k) * std::sqrt(Pk * pm.proj[n][k][k] / ak);
            else
              darg = -pm.o(n, j) * pm.o(n, j) * Pk * pm.proj[n][j][k];
            if (darg == 0.0) continue;
            bar += B / ln2 * darg / arg / gap;
          }
        return d + bar / w;
      };
      double l = lo, h = hi;
      if (hi_is_latency && deriv(hi) >= 0.0) {
        a[k] = hi;
        continue;
      }
      for (int bis = 0; bis < 200 && h - l > 1e-15 * std::max(1.0, h); ++bis) {
        const double mid = 0.5 * (l + h);
        if (deriv(mid) > 0.0)
          l = mid;
        else
          h = mid;
      }
      a[k] = 0.5 * (l + h);
    }
    if ((a - a_old).lpNorm<Eigen::Infinity>() <= 1e-9) break;
  }

  // The surrogate gaps can sit at a rounding distance from zero; pull back towards
  // the incumbent until the true barrier does not drop.
  SolutionState cand = s;
  cand.a = a;
  res.after = safe_barrier(cand, cfg, ch, assoc, opts.w);
  for (int bt = 0; bt < 40 && !not_worse(res.after, res.before); ++bt) {
    cand.a = 0.5 * (cand.a + s.a);
    res.after = safe_barrier(cand, cfg, ch, assoc, opts.w);
  }
  a = cand.a;
  bool lat_ok = true;
  for (int k = 0; k < K; ++k)
    if (a[k] > lat_cap[k] + 1e-12) lat_ok = false;
  if (!lat_ok || !not_worse(res.after, res.before)) {
    res.status = BlockStatus::rejected;
    res.detail = lat_ok ? "barrier would drop to " + std::to_string(res.after)
                        : "latency cap exceeded";
    return res;
  }
  s = std::move(cand);
  res.status = BlockStatus::accepted;
  return res;
}

}  // namespace rismec
