#include "block_common.hpp"

#include <algorithm>

namespace rismec {

using namespace detail;

BlockResult update_frequencies(SolutionState& s, const SystemConfig& cfg,
                               const BlockOptions& opts) {
  BlockResult res;
  const int N = cfg.N(), K = cfg.K();
  const Association assoc = serving_set(s, opts);
  res.before = p2_objective(s, cfg, assoc);
  if (assoc.count() == 0) {
    s.f_nk.setZero();
    s.f_min.setZero();
    res.after = res.before;
    res.detail = "no serving pairs";
    return res;
  }

  // Unknowns are scaled by the AP capacity F.
  const double F = cfg.ap_total_freq_hz;
  const double T = cfg.slot_s, chi = cfg.latency_cap_s, C = cfg.cycles_per_bit;
  ConicBuilder b;
  std::vector<std::vector<int>> fv(N, std::vector<int>(K, -1));
  std::vector<int> mv(K, -1);
  rvec lat_floor = rvec::Zero(K);
  rvec time_floor = rvec::Zero(K);
  double cmax = 0.0;
  for (int k = 0; k < K; ++k) {
    if (!assoc.any_for_user(k)) continue;
    if (!(s.t[k] < T)) {
      res.status = BlockStatus::failed;
      res.detail = "t_k reaches the slot length";
      return res;
    }
    const double left = offload_bits(s, cfg, k);
    if (left > 0.0) {
      const double room = chi - left / s.r[k];
      if (!(room > 0.0)) {
        res.status = BlockStatus::failed;
        res.detail = "latency cap unreachable at the current rate";
        return res;
      }
      lat_floor[k] = C * left / room;
    }
    time_floor[k] = C * s.t[k] * s.r[k] / (T - s.t[k]);
    mv[k] = b.add_var();
    b.add_nonneg(Affine::var(mv[k]) - time_floor[k] / F);
    cmax = std::max(cmax, s.t[k] * s.r[k] * cfg.kappa_ap * C * F / T);
  }
  Affine obj;
  for (int n = 0; n < N; ++n) {
    Affine cap(1.0 - kCapacityMargin);
    for (int k = 0; k < K; ++k) {
      if (!assoc.serving(n, k)) continue;
      fv[n][k] = b.add_var();
      b.add_nonneg(Affine::var(fv[n][k]) - lat_floor[k] / F);
      b.add_nonneg(Affine::var(fv[n][k]) - Affine::var(mv[k]));
      cap -= Affine::var(fv[n][k]);
      const double coef = s.t[k] * s.r[k] * cfg.kappa_ap * C * F / T;
      obj += Affine::var(fv[n][k], cmax > 0 ? coef / cmax : 0.0);
    }
    b.add_nonneg(cap);
  }
  b.set_objective(obj);
  const SolveReport rep = solve_conic(b.build());
  if (!usable(rep)) {
    res.status = rep.status == SolveStatus::infeasible ? BlockStatus::failed : BlockStatus::rejected;
    res.detail = "conic " + to_string(rep.status);
    return res;
  }

  SolutionState cand = s;
  cand.f_nk.setZero();
  cand.f_min.setZero();
  for (int k = 0; k < K; ++k) {
    if (mv[k] < 0) continue;
    double fmin = std::numeric_limits<double>::infinity();
    for (int n = 0; n < N; ++n) {
      if (fv[n][k] < 0) continue;
      const double f = std::max({F * rep.x[fv[n][k]], time_floor[k] * (1.0 + 1e-12),
                                 lat_floor[k] * (1.0 + 1e-12)});
      cand.f_nk(n, k) = f;
      fmin = std::min(fmin, f);
    }
    cand.f_min[k] = fmin;
  }
  for (int n = 0; n < N; ++n)
    if (cand.f_nk.row(n).sum() > F) {
      res.status = BlockStatus::rejected;
      res.detail = "capacity exceeded after snapping";
      return res;
    }
  res.after = p2_objective(cand, cfg, assoc);
  if (!not_worse(res.after, res.before)) {
    res.status = BlockStatus::rejected;
    return res;
  }
  s = std::move(cand);
  res.status = BlockStatus::accepted;
  return res;
}

}  // namespace rismec
