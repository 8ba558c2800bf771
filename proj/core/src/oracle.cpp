#include "rismec/oracle.hpp"

#include <chrono>
#include <cmath>

namespace rismec {

std::vector<Association> enumerate_associations(int n_aps, int n_users, bool require_nonempty) {
  if (n_aps < 1 || n_users < 1)
    throw std::invalid_argument("enumerate_associations: N and K must be >= 1");
  if (n_aps * n_users > 20)
    throw std::invalid_argument("enumerate_associations: N * K = " +
                                std::to_string(n_aps * n_users) + " exceeds 20");
  const int bits = n_aps * n_users;
  std::vector<Association> out;
  for (std::uint32_t mask = 0; mask < (1u << bits); ++mask) {
    Association a;
    a.serving = BoolMat::Constant(n_aps, n_users, false);
    for (int n = 0; n < n_aps; ++n)
      for (int k = 0; k < n_users; ++k) a.serving(n, k) = (mask >> (n * n_users + k)) & 1u;
    if (require_nonempty) {
      bool ok = true;
      for (int k = 0; k < n_users && ok; ++k) ok = a.any_for_user(k);
      if (!ok) continue;
    }
    out.push_back(std::move(a));
  }
  return out;
}

AmEsResult am_es_solve(const SystemConfig& cfg, const ChannelSet& ch, std::uint64_t seed,
                       const AmEsOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const Clock::time_point t0 = Clock::now();
  const std::vector<Association> all =
      enumerate_associations(cfg.N(), cfg.K(), opts.require_nonempty);
  AmEsResult out;
  out.complete = true;
  for (const Association& assoc : all) {
    if (opts.deadline_s &&
        std::chrono::duration<double>(Clock::now() - t0).count() > *opts.deadline_s) {
      out.complete = false;
      break;
    }
    DriverOptions d = opts.driver;
    d.allowed = assoc.serving;
    d.group_budget_active = false;
    const SolveResult r = solve(cfg, ch, d, seed);
    ++out.evaluated;
    if (!r.feasible || r.outcome == SolveOutcome::infeasible) continue;
    ++out.feasible_count;
    if (!out.feasible || r.ce > out.ce) {
      out.feasible = true;
      out.ce = r.ce;
      out.state = r.state;
      out.association = assoc;
    }
  }
  out.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

GridPhaseResult grid_phase_oracle(const SolutionState& s, const SystemConfig& cfg,
                                  const ChannelSet& ch, double resolution_deg, Direction dir) {
  const int M = cfg.M();
  if (M < 1 || M > 2) throw std::invalid_argument("grid_phase_oracle: needs 1 <= M <= 2");
  if (!(resolution_deg > 0.0)) throw std::invalid_argument("grid_phase_oracle: resolution must be > 0");
  const int steps = static_cast<int>(std::ceil(360.0 / resolution_deg - 1e-9));
  const double h = resolution_deg * std::numbers::pi / 180.0;
  const Association assoc = association(s);
  auto value = [&](const rvec& th) {
    if (dir == Direction::uplink) return uplink_phase_objective(s, cfg, ch, assoc, 1.0, th);
    return min_soc_slack(th, s, cfg, ch);
  };
  GridPhaseResult best;
  best.value = -std::numeric_limits<double>::infinity();
  rvec th(M);
  const int outer = M == 2 ? steps : 1;
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < outer; ++j) {
      th[0] = i * h;
      if (M == 2) th[1] = j * h;
      const double v = value(th);
      if (v > best.value) {
        best.value = v;
        best.theta = th;
      }
    }
  if (best.theta.size() == 0) best.theta = rvec::Zero(M);
  return best;
}

}  // namespace rismec
