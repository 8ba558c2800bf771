#include "block_common.hpp"

#include <algorithm>

namespace rismec {

using namespace detail;

double optimal_z(const SolutionState& s, const SystemConfig& cfg, const Association& assoc) {
  const double D = total_power(s, cfg, assoc);
  if (!(D > 1e-30)) throw DomainError("optimal_z: vanishing denominator");
  return p2_objective(s, cfg, assoc);
}

double dinkelbach_surrogate(const SolutionState& s, const SystemConfig& cfg,
                            const Association& assoc, double z) {
  const double D = total_power(s, cfg, assoc);
  const double num = p2_objective(s, cfg, assoc) * D;
  return -std::abs(num - z * D);
}

namespace {

/// Rates at every serving AP of user k.
std::vector<double> serving_rates(const SolutionState& s, const SystemConfig& cfg,
                                  const ChannelTable& iota, const Association& assoc, int k) {
  std::vector<double> out;
  for (int n = 0; n < cfg.N(); ++n)
    if (assoc.serving(n, k)) out.push_back(rate_from_sinr(uplink_sinr(s, cfg, iota, n, k), cfg));
  return out;
}

}  // namespace

BlockResult update_rate_time(SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                             const BlockOptions& opts) {
  BlockResult res;
  const int N = cfg.N(), K = cfg.K();
  const Association assoc = serving_set(s, opts);
  res.before = safe_barrier(s, cfg, ch, assoc, opts.w);
  if (assoc.count() == 0) {
    res.after = res.before;
    res.detail = "no serving pairs";
    return res;
  }
  if (!std::isfinite(res.before)) {
    res.status = BlockStatus::failed;
    res.detail = "incumbent outside the barrier domain";
    return res;
  }
  const double T = cfg.slot_s, C = cfg.cycles_per_bit, chi = cfg.latency_cap_s;
  const ChannelTable iota = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  std::vector<std::vector<double>> rates(K);
  rvec energy = rvec::Zero(K);  // sum_n f_nk kappa_n C_k over serving APs
  for (int k = 0; k < K; ++k) {
    if (!assoc.any_for_user(k)) continue;
    rates[k] = serving_rates(s, cfg, iota, assoc, k);
    for (int n = 0; n < N; ++n)
      if (assoc.serving(n, k)) energy[k] += s.f_nk(n, k) * cfg.kappa_ap * C;
  }

  SolutionState cand = s;
  double z = optimal_z(cand, cfg, assoc);
  for (int it = 0; it < opts.inner_max; ++it) {
    res.inner_iters = it + 1;
    // r-step: per-user concave 1-D problem, solved on its derivative. The
    // Dinkelbach part is divided by the current power so that its gradient
    // matches the ratio's at z = N/D.
    const double denom = total_power(cand, cfg, assoc);
    for (int k = 0; k < K; ++k) {
      if (!assoc.any_for_user(k)) continue;
      const double rmax = *std::min_element(rates[k].begin(), rates[k].end());
      const double left = offload_bits(cand, cfg, k);
      double lo = 0.0;
      bool ok = true;
      for (int n = 0; n < N; ++n) {
        if (!assoc.serving(n, k) || left <= 0.0) continue;
        const double room = chi - C * left / cand.f_nk(n, k);
        if (!(room > 0.0)) ok = false;
        else lo = std::max(lo, left / room);
      }
      double hi = rmax;
      bool time_cap = false;
      if (cand.t[k] > 0.0) {
        const double tb = cand.f_min[k] * (T - cand.t[k]) / (C * cand.t[k]);
        if (tb < hi) {
          hi = tb;
          time_cap = true;
        }
      }
      if (!ok || !(hi > lo)) continue;
      const double tk = cand.t[k];
      auto deriv = [&](double r) {
        double bar = 0.0;
        for (double R : rates[k]) bar += 1.0 / (R - r);
        return tk / T * (1.0 - z * energy[k]) / denom - bar / opts.w;
      };
      if (time_cap && deriv(hi) >= 0.0) {
        cand.r[k] = hi * (1.0 - 1e-12);
        continue;
      }
      double l = lo, h = hi;
      if (deriv(l + 1e-12 * (h - l)) <= 0.0) {
        cand.r[k] = std::max(lo, 1e-9 * rmax);
        continue;
      }
      for (int bis = 0; bis < 200 && h - l > 1e-13 * std::max(1.0, h); ++bis) {
        const double mid = 0.5 * (l + h);
        if (deriv(mid) > 0.0)
          l = mid;
        else
          h = mid;
      }
      cand.r[k] = l;
    }

    // t-step: linear program in t/T.
    ConicBuilder b;
    std::vector<int> tv(K, -1);
    Affine obj;
    double cmax = 0.0;
    for (int k = 0; k < K; ++k)
      if (assoc.any_for_user(k))
        cmax = std::max(cmax, std::abs(cand.r[k] * (1.0 - z * energy[k])));
    for (int k = 0; k < K; ++k) {
      if (!assoc.any_for_user(k)) continue;
      tv[k] = b.add_var();
      b.add_nonneg(Affine::var(tv[k]));
      b.add_nonneg(Affine(1.0) - Affine::var(tv[k], 1.0 + C * cand.r[k] / cand.f_min[k]));
      const double coef = cand.r[k] * (1.0 - z * energy[k]);
      obj += Affine::var(tv[k], cmax > 0 ? -coef / cmax : 0.0);
    }
    b.set_objective(obj);
    const SolveReport rep = solve_conic(b.build());
    if (usable(rep)) {
      for (int k = 0; k < K; ++k) {
        if (tv[k] < 0) continue;
        const double cap = T / (1.0 + C * cand.r[k] / cand.f_min[k]);
        cand.t[k] = std::clamp(T * rep.x[tv[k]], 0.0, cap);
      }
    }

    const double znew = optimal_z(cand, cfg, assoc);
    const bool done = std::abs(znew - z) <= opts.inner_tol * 1e-3 * std::max(1.0, std::abs(z));
    z = znew;
    if (done) break;
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
