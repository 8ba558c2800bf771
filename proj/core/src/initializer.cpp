#include "rismec/initializer.hpp"

#include "block_common.hpp"
#include "rismec/rng.hpp"

#include <algorithm>
#include <random>

namespace rismec {

using namespace detail;

namespace {

// Stream tags under the caller's seed.
constexpr std::uint64_t kThetaUlStream = 0x10;
constexpr std::uint64_t kThetaDlStream = 0x11;
constexpr std::uint64_t kPartitionStream = 0x12;
constexpr std::uint64_t kBeamStream = 0x13;

constexpr double kReportTol = 1e-6;

bool latency_ok(const SolutionState& s, const SystemConfig& cfg, const BoolMat& serving, int k) {
  for (int n = 0; n < cfg.N(); ++n) {
    if (!serving(n, k)) continue;
    try {
      if (latency(s, cfg, n, k) > cfg.latency_cap_s) return false;
    } catch (const DomainError&) {
      return false;
    }
  }
  return true;
}

/// Minimizes sum_k a_k e_k over the downlink beamformers of `serving`, where e_k
/// is the (noise-scaled) shortfall of user k's SOC constraint.
bool hinge_step(SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                const BoolMat& serving) {
  const int N = cfg.N(), K = cfg.K(), L = cfg.L();
  const ChannelTable iota = effective_channels(ch, s.theta_dl, cfg.phase, Direction::downlink);
  ConicBuilder b;
  std::vector<std::vector<int>> base(N, std::vector<int>(K, -1));
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      if (serving(n, k)) base[n][k] = b.add_vars(2 * L);

  const double inv_sigma = 1.0 / std::sqrt(cfg.noise_user_w);
  Affine obj;
  for (int k = 0; k < K; ++k) {
    if (!(s.a[k] > 0.0)) continue;
    const int ev = b.add_var();
    b.add_nonneg(Affine::var(ev));
    obj += Affine::var(ev, std::abs(s.a[k]));
    const double gam = cfg.sinr_target_lin[k] * (1.0 + kSinrMargin);
    Affine head = Affine::var(ev), dummy;
    for (int n = 0; n < N; ++n)
      if (base[n][k] >= 0)
        for (int i = 0; i < L; ++i)
          add_inner(head, dummy, iota[n][k][i], base[n][k], i, inv_sigma / std::sqrt(gam));
    std::vector<Affine> cone{head};
    for (int l = 0; l < K; ++l) {
      if (l == k) continue;
      Affine re, im;
      for (int n = 0; n < N; ++n)
        if (base[n][l] >= 0)
          for (int i = 0; i < L; ++i) add_inner(re, im, iota[n][k][i], base[n][l], i, inv_sigma);
      cone.push_back(re);
      cone.push_back(im);
    }
    cone.push_back(Affine(1.0));
    b.add_soc(cone);
  }
  const double pmax = cfg.ap_max_power_w * (1.0 - kPowerMargin);
  for (int n = 0; n < N; ++n) {
    std::vector<Affine> cone{Affine(std::sqrt(pmax))};
    for (int k = 0; k < K; ++k)
      if (base[n][k] >= 0)
        for (int i = 0; i < 2 * L; ++i) cone.push_back(Affine::var(base[n][k] + i));
    if (cone.size() > 1) b.add_soc(cone);
  }
  if (cfg.group_budget) {
    Affine total;
    for (int n = 0; n < N; ++n)
      for (int k = 0; k < K; ++k) {
        if (base[n][k] < 0) continue;
        const int tv = b.add_var();
        std::vector<Affine> cone{Affine::var(tv)};
        for (int i = 0; i < 2 * L; ++i) cone.push_back(Affine::var(base[n][k] + i));
        for (int i = 0; i < L; ++i) {
          cone.push_back(Affine(s.v_ul[n][k][i].real()));
          cone.push_back(Affine(s.v_ul[n][k][i].imag()));
        }
        b.add_soc(cone);
        total += Affine::var(tv);
      }
    b.add_nonneg(Affine(*cfg.group_budget * (1.0 - kBudgetMargin)) - total);
  }
  b.set_objective(obj);
  const SolveReport rep = solve_conic(b.build());
  if (!usable(rep)) return false;
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) {
      cvec v = cvec::Zero(L);
      if (base[n][k] >= 0)
        for (int i = 0; i < L; ++i)
          v[i] = cd(rep.x[base[n][k] + 2 * i], rep.x[base[n][k] + 2 * i + 1]);
      s.v_dl[n][k] = v;
    }
  return true;
}

bool clean(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch) {
  if (infeasibility_hinge(s, cfg, ch) > 0.0) return false;
  try {
    if (constraint_report(s, cfg, ch).min_residual() < -kReportTol) return false;
    const Association assoc = association(s);
    if (!std::isfinite(barrier_objective(s, cfg, ch, assoc, 1.0))) return false;
    for (int k = 0; k < cfg.K(); ++k)
      if (s.a[k] > 0.0 && !assoc.any_for_user(k)) return false;
  } catch (const DomainError&) {
    return false;
  }
  return true;
}

}  // namespace

double violation_objective(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch) {
  const ChannelTable iota = effective_channels(ch, s.theta_dl, cfg.phase, Direction::downlink);
  double acc = 0.0;
  for (int k = 0; k < cfg.K(); ++k)
    if (s.a[k] != 0.0) acc += std::abs(s.a[k]) * std::max(0.0, soc_slack(s, cfg, iota, k));
  return acc;
}

double infeasibility_hinge(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch) {
  const ChannelTable iota = effective_channels(ch, s.theta_dl, cfg.phase, Direction::downlink);
  double acc = 0.0;
  for (int k = 0; k < cfg.K(); ++k)
    if (s.a[k] != 0.0) acc += std::abs(s.a[k]) * std::max(0.0, -soc_slack(s, cfg, iota, k));
  return acc;
}

rvec initial_phases(const SystemConfig& cfg, std::uint64_t seed, Direction dir) {
  Rng rng(child_seed(seed, dir == Direction::uplink ? kThetaUlStream : kThetaDlStream));
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  rvec th(cfg.M());
  for (int m = 0; m < cfg.M(); ++m) th[m] = u(rng);
  return th;
}

void complete_state(SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                    const BoolMat& serving, double rate_shrink) {
  const int N = cfg.N(), K = cfg.K(), L = cfg.L();
  const ChannelTable iota = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  double vnorm = std::sqrt(cfg.ap_max_power_w / K);
  if (cfg.group_budget) {
    // Keep the uplink share of the group norm at half the budget.
    const int pairs = std::max<int>(1, static_cast<int>(serving.count()));
    vnorm = std::min(vnorm, 0.5 * *cfg.group_budget / pairs);
  }
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) {
      if (!serving(n, k)) {
        s.v_ul[n][k] = cvec::Zero(L);
        continue;
      }
      cvec v = uplink_covariance(s, cfg, iota, n, k).ldlt().solve(iota[n][k]);
      const double nv = v.norm();
      s.v_ul[n][k] = nv > 0.0 ? cvec(v * (vnorm / nv)) : cvec(cvec::Constant(L, vnorm / std::sqrt(L)));
    }
  s.f_nk = rmat::Zero(N, K);
  for (int n = 0; n < N; ++n) {
    const int users = static_cast<int>(serving.row(n).count());
    if (users == 0) continue;
    // Slightly under the capacity so the capacity row keeps a positive slack.
    const double share = cfg.ap_total_freq_hz / users * (1.0 - 1e-9);
    for (int k = 0; k < K; ++k)
      if (serving(n, k)) s.f_nk(n, k) = share;
  }
  for (int k = 0; k < K; ++k) {
    double rmin = std::numeric_limits<double>::infinity();
    double fmin = std::numeric_limits<double>::infinity();
    for (int n = 0; n < N; ++n)
      if (serving(n, k)) {
        rmin = std::min(rmin, rate_from_sinr(uplink_sinr(s, cfg, iota, n, k), cfg));
        fmin = std::min(fmin, s.f_nk(n, k));
      }
    if (!std::isfinite(rmin)) {
      s.r[k] = 0.0;
      s.f_min[k] = 0.0;
      s.t[k] = 0.0;
      continue;
    }
    s.r[k] = rate_shrink * rmin;
    s.f_min[k] = fmin;
    s.t[k] = cfg.slot_s / (1.0 + cfg.cycles_per_bit * s.r[k] / fmin);
  }
}

InitResult find_feasible(const SystemConfig& cfg_in, const ChannelSet& ch, std::uint64_t seed,
                         const InitOptions& opts) {
  cfg_in.validate();
  ch.validate(cfg_in);
  if (opts.max_rounds < 1) throw std::invalid_argument("find_feasible: max_rounds must be >= 1");
  const int N = cfg_in.N(), K = cfg_in.K(), L = cfg_in.L();
  const BoolMat serving = opts.allowed ? *opts.allowed : all_pairs(cfg_in);
  if (serving.rows() != N || serving.cols() != K)
    throw std::invalid_argument("find_feasible: allowed mask must be N x K");

  InitResult out;
  SolutionState s = SolutionState::zeros(cfg_in);
  s.theta_ul = initial_phases(cfg_in, seed, Direction::uplink);
  s.theta_dl = initial_phases(cfg_in, seed, Direction::downlink);
  {
    Rng rng(child_seed(seed, kPartitionStream));
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int k = 0; k < K; ++k) s.a[k] = u(rng);
  }
  for (int k = 0; k < K; ++k)
    if (!serving.col(k).any()) s.a[k] = 0.0;
  {
    Rng rng(child_seed(seed, kBeamStream));
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    for (int n = 0; n < N; ++n) {
      double p = 0.0;
      for (int k = 0; k < K; ++k) {
        cvec v = cvec::Zero(L);
        for (int i = 0; i < L; ++i) {
          const double re = g(rng), im = g(rng);
          if (serving(n, k)) v[i] = cd(re, im);
        }
        s.v_dl[n][k] = v;
        p += v.squaredNorm();
      }
      if (p > cfg_in.ap_max_power_w) {
        const double scale = 0.9 * std::sqrt(cfg_in.ap_max_power_w / p);
        for (int k = 0; k < K; ++k) s.v_dl[n][k] *= scale;
      }
    }
  }

  // Uplink side. Halve a_k while user k misses its latency cap.
  complete_state(s, cfg_in, ch, serving, 0.99);
  for (int rep = 0; rep < 60; ++rep) {
    bool all = true;
    for (int k = 0; k < K; ++k)
      if (s.a[k] > 0.0 && !latency_ok(s, cfg_in, serving, k)) {
        s.a[k] *= 0.5;
        all = false;
      }
    if (all) break;
    complete_state(s, cfg_in, ch, serving, 0.99);
  }

  // An unset budget is derived from the final point, so the rounds run without it.
  SystemConfig cfg = cfg_in;

  double best_hinge = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int round = 0; round < opts.max_rounds; ++round) {
    out.rounds = round + 1;
    if (!hinge_step(s, cfg, ch, serving))
      out.detail = "hinge program failed in round " + std::to_string(round + 1);
    if (clean(s, cfg, ch)) {
      out.feasible = true;
      break;
    }
    if (cfg.M() > 0 && (s.a.array() > 0.0).any()) {
      const PhaseResult pr = solve_downlink_phase(s, cfg, ch, opts.penalty, true);
      s.theta_dl = pr.theta;
    }
    if (clean(s, cfg, ch)) {
      out.feasible = true;
      break;
    }
    // Give up once the hinge stops shrinking.
    const double h = infeasibility_hinge(s, cfg, ch);
    if (h < (1.0 - opts.stall_rel) * best_hinge) {
      best_hinge = h;
      stalled = 0;
    } else if (++stalled >= opts.stall_rounds) {
      out.detail = "hinge stalled after " + std::to_string(round + 1) + " rounds";
      break;
    }
  }

  out.hinge = infeasibility_hinge(s, cfg, ch);
  if (out.feasible && !cfg_in.group_budget) {
    out.derived_budget = 2.0 * group_norm(s);
    cfg.group_budget = out.derived_budget;
    if (!clean(s, cfg, ch)) out.feasible = false;
  }
  if (!out.feasible && out.detail.empty())
    out.detail = "no feasible point after " + std::to_string(out.rounds) + " rounds";
  out.state = std::move(s);
  return out;
}

}  // namespace rismec
