#include "rismec/am_driver.hpp"

#include "block_common.hpp"

#include <chrono>
#include <functional>

namespace rismec {

using namespace detail;

std::string to_string(SolveMode m) {
  switch (m) {
    case SolveMode::full: return "full";
    case SolveMode::without_ris: return "without_ris";
    case SolveMode::without_ct: return "without_ct";
    case SolveMode::without_ris_ct: return "without_ris_ct";
    case SolveMode::am_fp: return "am_fp";
  }
  return "unknown";
}

SolveMode parse_mode(const std::string& name) {
  for (SolveMode m : all_modes())
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

std::vector<SolveMode> all_modes() {
  return {SolveMode::full, SolveMode::am_fp, SolveMode::without_ris, SolveMode::without_ct,
          SolveMode::without_ris_ct};
}

std::string to_string(SolveOutcome o) {
  switch (o) {
    case SolveOutcome::converged: return "converged";
    case SolveOutcome::max_outer: return "max_outer";
    case SolveOutcome::infeasible: return "infeasible";
    case SolveOutcome::aborted: return "aborted";
    case SolveOutcome::deadline: return "deadline";
  }
  return "unknown";
}

void DriverOptions::validate() const {
  if (!(w0 > 0)) throw std::invalid_argument("driver.w0: must be > 0");
  if (!(growth > 1)) throw std::invalid_argument("driver.growth: must be > 1");
  if (!(w_max >= w0)) throw std::invalid_argument("driver.w_max: must be >= w0");
  if (!(rel_tol > 0)) throw std::invalid_argument("driver.rel_tol: must be > 0");
  if (max_outer < 1) throw std::invalid_argument("driver.max_outer: must be >= 1");
  if (max_failures < 1) throw std::invalid_argument("driver.max_failures: must be >= 1");
  penalty.validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double barrier_or_neginf(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                         double w) {
  return safe_barrier(s, cfg, ch, association(s), w);
}

double p2_or_nan(const SolutionState& s, const SystemConfig& cfg) {
  try {
    return p2_objective(s, cfg, association(s));
  } catch (const DomainError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

double ce_or_zero(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch) {
  try {
    return computation_efficiency(s, cfg, ch);
  } catch (const DomainError&) {
    return 0.0;
  }
}

double report_min(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch) {
  try {
    return constraint_report(s, cfg, ch).min_residual();
  } catch (const DomainError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

SolveResult solve(const SystemConfig& cfg_in, const ChannelSet& ch, const DriverOptions& opts,
                  std::uint64_t seed) {
  opts.validate();
  const Clock::time_point t0 = Clock::now();
  SolveResult out;
  out.config = cfg_in;
  SystemConfig& cfg = out.config;
  if (!opts.group_budget_active) cfg.group_budget.reset();

  InitOptions io;
  io.max_rounds = opts.init_rounds;
  io.allowed = opts.allowed;
  io.penalty = opts.penalty;
  InitResult init = find_feasible(cfg, ch, seed, io);
  out.init_rounds = init.rounds;
  out.state = init.state;
  if (!init.feasible) {
    out.outcome = SolveOutcome::infeasible;
    out.detail = init.detail;
    out.wall_s = seconds_since(t0);
    return out;
  }
  if (opts.group_budget_active && !cfg.group_budget) cfg.group_budget = init.derived_budget;
  SolutionState& s = out.state;

  BlockOptions bo;
  bo.allowed = opts.allowed;
  bo.group_budget_active = opts.group_budget_active;
  bo.inner_tol = opts.inner_tol;
  bo.inner_max = opts.inner_max;

  using Step = std::function<BlockResult()>;
  const std::vector<std::pair<std::string, Step>> steps = {
      {"v_ul", [&] { return update_uplink_beamformers(s, cfg, ch, bo); }},
      {"a", [&] { return update_power_partition(s, cfg, ch, bo); }},
      {"theta_ul", [&] { return update_uplink_phases(s, cfg, ch, bo); }},
      {"v_dl", [&] { return update_downlink_beamformers(s, cfg, ch, bo); }},
      {"f", [&] { return update_frequencies(s, cfg, bo); }},
      {"r_t", [&] { return update_rate_time(s, cfg, ch, bo); }},
      {"theta_dl",
       [&] {
         BlockResult r;
         if (cfg.M() == 0 || !(s.a.array() > 0.0).any()) return r;
         const PhaseResult pr =
             solve_downlink_phase(s, cfg, ch, opts.penalty, opts.feasibility_only_phase);
         s.theta_dl = pr.theta;
         r.status = BlockStatus::accepted;
         r.before = pr.slack_before;
         r.after = pr.slack_after;
         r.inner_iters = pr.outer_iters;
         r.detail = to_string(pr.status);
         return r;
       }},
  };

  double w = opts.w0;
  double prev_ce = ce_or_zero(s, cfg, ch);
  int failures = 0;
  out.outcome = SolveOutcome::max_outer;
  for (int it = 0; it < opts.max_outer; ++it) {
    bo.w = w;
    TraceEntry te;
    te.w = w;
    bool abort = false;
    for (const auto& [name, step] : steps) {
      BlockRecord rec;
      rec.name = name;
      rec.barrier_before = barrier_or_neginf(s, cfg, ch, w);
      rec.p2_before = p2_or_nan(s, cfg);
      const Clock::time_point tb = Clock::now();
      BlockResult br;
      try {
        br = step();
      } catch (const DomainError& e) {
        br.status = BlockStatus::failed;
        br.detail = e.what();
      }
      rec.seconds = seconds_since(tb);
      rec.status = br.status;
      rec.detail = br.detail;
      rec.barrier_after = barrier_or_neginf(s, cfg, ch, w);
      rec.p2_after = p2_or_nan(s, cfg);
      te.blocks.push_back(std::move(rec));
      failures = br.status == BlockStatus::failed ? failures + 1 : 0;
      if (failures >= opts.max_failures) {
        abort = true;
        break;
      }
    }
    te.barrier = barrier_or_neginf(s, cfg, ch, w);
    te.ce = ce_or_zero(s, cfg, ch);
    te.max_violation = std::max(0.0, -report_min(s, cfg, ch));
    te.serving = association(s).serving;
    out.trace.iterations.push_back(std::move(te));
    if (abort) {
      out.outcome = SolveOutcome::aborted;
      out.detail = "3 consecutive block failures";
      break;
    }
    const double ce = out.trace.iterations.back().ce;
    const double rel = (ce - prev_ce) / std::max(std::abs(prev_ce), 1e-300);
    prev_ce = ce;
    if (rel < opts.rel_tol && w >= opts.w_max) {
      out.outcome = SolveOutcome::converged;
      break;
    }
    w = std::min(w * opts.growth, opts.w_max);
    if (opts.deadline_s && seconds_since(t0) > *opts.deadline_s) {
      out.outcome = SolveOutcome::deadline;
      break;
    }
  }

  out.ce = ce_or_zero(s, cfg, ch);
  out.min_residual = report_min(s, cfg, ch);
  out.feasible = out.min_residual >= -1e-6;
  out.wall_s = seconds_since(t0);
  return out;
}

BoolMat best_channel_mask(const SystemConfig& cfg, const ChannelSet& ch, const rvec& theta_ul) {
  const ChannelTable iota = effective_channels(ch, theta_ul, cfg.phase, Direction::uplink);
  BoolMat mask = BoolMat::Constant(cfg.N(), cfg.K(), false);
  for (int k = 0; k < cfg.K(); ++k) {
    int best = 0;
    double bn = -1.0;
    for (int n = 0; n < cfg.N(); ++n) {
      const double v = iota[n][k].norm();
      if (v > bn) {
        bn = v;
        best = n;
      }
    }
    mask(best, k) = true;
  }
  return mask;
}

SolveResult benchmark_solve(const SystemConfig& cfg, const ChannelSet& ch, SolveMode mode,
                            std::uint64_t seed, const DriverOptions& base) {
  DriverOptions opts = base;
  const bool no_ris = mode == SolveMode::without_ris || mode == SolveMode::without_ris_ct;
  const bool no_ct = mode == SolveMode::without_ct || mode == SolveMode::without_ris_ct;
  const ChannelSet used = no_ris ? ch.without_ris() : ch;
  if (no_ct) {
    BoolMat mask = best_channel_mask(cfg, used, initial_phases(cfg, seed, Direction::uplink));
    if (opts.allowed) mask = mask && *opts.allowed;
    opts.allowed = mask;
  }
  if (mode == SolveMode::am_fp) opts.feasibility_only_phase = true;
  return solve(cfg, used, opts, seed);
}

}  // namespace rismec
