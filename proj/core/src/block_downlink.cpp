#include "block_common.hpp"

#include <algorithm>

namespace rismec {

using namespace detail;

std::string to_string(BlockStatus s) {
  switch (s) {
    case BlockStatus::accepted: return "accepted";
    case BlockStatus::rejected: return "rejected";
    case BlockStatus::skipped: return "skipped";
    case BlockStatus::failed: return "failed";
  }
  return "unknown";
}

Association serving_set(const SolutionState& s, const BlockOptions& opts) {
  Association a = association(s);
  if (opts.allowed) a.serving = a.serving && *opts.allowed;
  return a;
}

namespace {

struct DownlinkProgram {
  ConicBuilder builder;
  std::vector<std::pair<int, int>> groups;  // (n, k)
  std::vector<int> base;                    // first lifted slot of each group
};

/// Builds the relaxed downlink problem over `active` groups.
DownlinkProgram build_downlink(const SolutionState& s, const SystemConfig& cfg,
                               const ChannelTable& iota_dl, const BoolMat& active,
                               const BlockOptions& opts) {
  const int N = cfg.N(), K = cfg.K(), L = cfg.L();
  DownlinkProgram P;
  ConicBuilder& b = P.builder;
  std::vector<std::vector<int>> gidx(N, std::vector<int>(K, -1));
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      if (active(n, k)) {
        gidx[n][k] = static_cast<int>(P.groups.size());
        P.groups.emplace_back(n, k);
        P.base.push_back(b.add_vars(2 * L));
      }

  // Objective: sum_g c_g ||v_g|| + ||v_g||^3, lifted as
  //   s_g >= ||v_g||, u_g >= s_g^2, q_g s_g >= u_g^2  =>  q_g >= s_g^3.
  Affine obj;
  for (std::size_t g = 0; g < P.groups.size(); ++g) {
    const auto [n, k] = P.groups[g];
    const int sv = b.add_var(), uv = b.add_var(), qv = b.add_var();
    std::vector<Affine> cone{Affine::var(sv)};
    for (int i = 0; i < 2 * L; ++i) cone.push_back(Affine::var(P.base[g] + i));
    b.add_soc(cone);
    b.add_soc({Affine::var(uv) + 1.0, 2.0 * Affine::var(sv), Affine::var(uv) - 1.0});
    b.add_soc({Affine::var(qv) + Affine::var(sv), 2.0 * Affine::var(uv),
               Affine::var(qv) - Affine::var(sv)});
    const double cg = cfg.cycles_per_bit * s.t[k] * s.r[k] * s.f_nk(n, k) * cfg.kappa_ap /
                      cfg.slot_s;
    obj += Affine::var(sv, cg) + Affine::var(qv);
  }
  b.set_objective(obj);

  // Per-AP power.
  const double pmax = cfg.ap_max_power_w * (1.0 - kPowerMargin);
  for (int n = 0; n < N; ++n) {
    std::vector<Affine> cone{Affine(std::sqrt(pmax))};
    for (int k = 0; k < K; ++k)
      if (gidx[n][k] >= 0)
        for (int i = 0; i < 2 * L; ++i) cone.push_back(Affine::var(P.base[gidx[n][k]] + i));
    if (cone.size() > 1) b.add_soc(cone);
  }

  // SOC form of the SINR constraints, rows scaled by 1/sigma_k.
  const double inv_sigma = 1.0 / std::sqrt(cfg.noise_user_w);
  for (int k = 0; k < K; ++k) {
    if (!(s.a[k] > 0.0)) continue;
    const double gam = cfg.sinr_target_lin[k] * (1.0 + kSinrMargin);
    std::vector<Affine> cone;
    Affine head, dummy;
    for (int n = 0; n < N; ++n)
      if (gidx[n][k] >= 0)
        for (int i = 0; i < L; ++i)
          add_inner(head, dummy, iota_dl[n][k][i], P.base[gidx[n][k]], i,
                    inv_sigma / std::sqrt(gam));
    cone.push_back(head);
    for (int l = 0; l < K; ++l) {
      if (l == k) continue;
      Affine re, im;
      for (int n = 0; n < N; ++n)
        if (gidx[n][l] >= 0)
          for (int i = 0; i < L; ++i)
            add_inner(re, im, iota_dl[n][k][i], P.base[gidx[n][l]], i, inv_sigma);
      cone.push_back(re);
      cone.push_back(im);
    }
    cone.push_back(Affine(1.0));
    b.add_soc(cone);
  }

  // Group budget on the stacked beamformers.
  if (opts.group_budget_active && cfg.group_budget) {
    double fixed = 0.0;
    for (int n = 0; n < N; ++n)
      for (int k = 0; k < K; ++k)
        if (gidx[n][k] < 0)
          fixed += std::sqrt(s.v_dl[n][k].squaredNorm() + s.v_ul[n][k].squaredNorm());
    Affine total;
    for (std::size_t g = 0; g < P.groups.size(); ++g) {
      const auto [n, k] = P.groups[g];
      const int tv = b.add_var();
      std::vector<Affine> cone{Affine::var(tv)};
      for (int i = 0; i < 2 * L; ++i) cone.push_back(Affine::var(P.base[g] + i));
      for (int i = 0; i < L; ++i) {
        cone.push_back(Affine(s.v_ul[n][k][i].real()));
        cone.push_back(Affine(s.v_ul[n][k][i].imag()));
      }
      b.add_soc(cone);
      total += Affine::var(tv);
    }
    b.add_nonneg(Affine(*cfg.group_budget * (1.0 - kBudgetMargin) - fixed) - total);
  }
  return P;
}

bool solve_into(const SolutionState& s, const SystemConfig& cfg, const ChannelTable& iota_dl,
                const BoolMat& active, const BlockOptions& opts, SolutionState& out,
                std::string& why) {
  DownlinkProgram P = build_downlink(s, cfg, iota_dl, active, opts);
  const SolveReport rep = solve_conic(P.builder.build());
  if (!usable(rep)) {
    why = "conic " + to_string(rep.status);
    return false;
  }
  out = s;
  for (int n = 0; n < cfg.N(); ++n)
    for (int k = 0; k < cfg.K(); ++k)
      if (!active(n, k)) out.v_dl[n][k].setZero();
  for (std::size_t g = 0; g < P.groups.size(); ++g) {
    const auto [n, k] = P.groups[g];
    cvec v(cfg.L());
    for (int i = 0; i < cfg.L(); ++i)
      v[i] = cd(rep.x[P.base[g] + 2 * i], rep.x[P.base[g] + 2 * i + 1]);
    out.v_dl[n][k] = v;
  }
  return true;
}

bool downlink_feasible(const SolutionState& s, const SystemConfig& cfg,
                       const ChannelTable& iota_dl) {
  for (int k = 0; k < cfg.K(); ++k)
    if (s.a[k] > 0.0 && downlink_sinr(s, cfg, iota_dl, k) < cfg.sinr_target_lin[k]) return false;
  for (int n = 0; n < cfg.N(); ++n) {
    double p = 0.0;
    for (int k = 0; k < cfg.K(); ++k) p += s.v_dl[n][k].squaredNorm();
    if (p > cfg.ap_max_power_w) return false;
  }
  if (cfg.group_budget && group_norm(s) > *cfg.group_budget) return false;
  return true;
}

}  // namespace

BlockResult update_downlink_beamformers(SolutionState& s, const SystemConfig& cfg,
                                        const ChannelSet& ch, const BlockOptions& opts) {
  BlockResult res;
  const Association assoc = serving_set(s, opts);
  res.before = p2_objective(s, cfg, assoc);
  if (assoc.count() == 0) {
    res.detail = "no serving pairs";
    return res;
  }
  const ChannelTable iota_dl = effective_channels(ch, s.theta_dl, cfg.phase, Direction::downlink);

  SolutionState cand;
  std::string why;
  if (!solve_into(s, cfg, iota_dl, assoc.serving, opts, cand, why)) {
    res.status = BlockStatus::failed;
    res.detail = why;
    return res;
  }

  // Switch off groups whose downlink beamformer vanished, then polish.
  double peak = 0.0;
  for (int n = 0; n < cfg.N(); ++n)
    for (int k = 0; k < cfg.K(); ++k) peak = std::max(peak, cand.v_dl[n][k].norm());
  BoolMat keep = assoc.serving;
  for (int n = 0; n < cfg.N(); ++n)
    for (int k = 0; k < cfg.K(); ++k)
      if (keep(n, k) && cand.v_dl[n][k].norm() <= kSparsityThreshold * peak) keep(n, k) = false;
  if (keep.count() < assoc.serving.count()) {
    SolutionState pruned = s;
    for (int n = 0; n < cfg.N(); ++n)
      for (int k = 0; k < cfg.K(); ++k)
        if (assoc.serving(n, k) && !keep(n, k)) {
          pruned.v_dl[n][k].setZero();
          pruned.v_ul[n][k].setZero();
          pruned.f_nk(n, k) = 0.0;
        }
    SolutionState polished;
    if (solve_into(pruned, cfg, iota_dl, keep, opts, polished, why)) {
      cand = polished;
      res.detail = "pruned " + std::to_string(assoc.serving.count() - keep.count()) + " groups";
    }
  }

  if (!downlink_feasible(cand, cfg, iota_dl)) {
    res.status = BlockStatus::rejected;
    res.detail = "solution misses SINR or power targets";
    return res;
  }
  const Association after = serving_set(cand, opts);
  bool served = true;
  for (int k = 0; k < cfg.K(); ++k)
    if (cand.a[k] > 0.0 && !after.any_for_user(k)) served = false;
  res.after = p2_objective(cand, cfg, after);
  if (!served || !not_worse(res.after, res.before)) {
    res.status = BlockStatus::rejected;
    return res;
  }
  s = std::move(cand);
  res.status = BlockStatus::accepted;
  return res;
}

}  // namespace rismec
