#include "rismec/downlink_phase.hpp"

#include "rismec/armijo.hpp"

#include <algorithm>
#include <cmath>

namespace rismec {

void PenaltyParams::validate() const {
  if (!(mu0 > 0)) throw std::invalid_argument("penalty.mu0: must be > 0");
  if (!(growth > 1)) throw std::invalid_argument("penalty.growth: must be > 1");
  if (!(eps1 > 0)) throw std::invalid_argument("penalty.eps1: must be > 0");
  if (!(eps2 > 0)) throw std::invalid_argument("penalty.eps2: must be > 0");
  if (max_outer < 1 || max_inner < 1)
    throw std::invalid_argument("penalty: iteration caps must be >= 1");
}

std::string to_string(PhaseStatus s) {
  switch (s) {
    case PhaseStatus::improved: return "improved";
    case PhaseStatus::unchanged: return "unchanged";
    case PhaseStatus::skipped: return "skipped";
    case PhaseStatus::capped: return "capped";
  }
  return "unknown";
}

namespace {

bool any_offloading(const SolutionState& s) { return (s.a.array() > 0.0).any(); }

double min_slack_impl(const rvec& theta, const SolutionState& s, const SystemConfig& cfg,
                      const ChannelSet& ch, bool scaled) {
  if (!any_offloading(s)) throw std::invalid_argument("min_soc_slack: no offloading user");
  const ChannelTable iota = effective_channels(ch, theta, cfg.phase, Direction::downlink);
  const double sigma = std::sqrt(cfg.noise_user_w);
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.K(); ++k)
    if (s.a[k] > 0.0) {
      const double sl = soc_slack(s, cfg, iota, k);
      m = std::min(m, scaled ? sl / sigma : sl);
    }
  return m;
}

cvec reflection_vector(const rvec& theta, const PhaseParams& pp) {
  cvec d(theta.size());
  for (int m = 0; m < theta.size(); ++m) d[m] = reflection(theta[m], pp);
  return d;
}

}  // namespace

double min_soc_slack(const rvec& theta_dl, const SolutionState& s, const SystemConfig& cfg,
                     const ChannelSet& ch) {
  return min_slack_impl(theta_dl, s, cfg, ch, false);
}

double min_scaled_soc_slack(const rvec& theta_dl, const SolutionState& s, const SystemConfig& cfg,
                            const ChannelSet& ch) {
  return min_slack_impl(theta_dl, s, cfg, ch, true);
}

rvec fit_theta_step(const rvec& theta, const cvec& target, const PhaseParams& pp) {
  rvec out = theta;
  for (int m = 0; m < theta.size(); ++m) {
    const cd x = target[m];
    auto fg = [&](const rvec& th, rvec* g) {
      const cd d = x - reflection(th[0], pp);
      if (g) (*g)[0] = -2.0 * (std::conj(d) * reflection_derivative(th[0], pp)).real();
      return std::norm(d);
    };
    ArmijoOptions ao;
    ao.max_iters = 60;
    ao.grad_tol = 1e-9;
    double best_f = std::numeric_limits<double>::infinity();
    for (double start : {theta[m], std::arg(x)}) {
      rvec x0(1);
      x0[0] = start;
      const ArmijoResult r = armijo_descent(fg, x0, ao);
      if (r.status != ArmijoStatus::aborted && r.f < best_f) {
        best_f = r.f;
        out[m] = wrap_phase(r.x[0]);
      }
    }
  }
  return out;
}

ThetaMatrixResult theta_matrix_step(const rvec& theta, const SolutionState& s,
                                    const SystemConfig& cfg, const ChannelSet& ch, double mu,
                                    double y_cap) {
  const int N = cfg.N(), K = cfg.K(), M = cfg.M();
  const double inv_sigma = 1.0 / std::sqrt(cfg.noise_user_w);
  const cvec d = reflection_vector(theta, cfg.phase);

  // Theta = diag(d + u / sc) with sc = max(1, mu): keeps the cost vector O(1)
  // when mu is large, where the optimal deviation from d is O(1 / mu).
  const double sc = std::max(1.0, mu);
  ConicBuilder b;
  const int ub = b.add_vars(2 * M);
  const int yv = b.add_var();
  const int ev = b.add_var();

  // a_kl(x) = sum_n h_d,nk^H v_nl + sum_m conj(x_m) c_klm with
  // c_klm = sum_n conj(h_r,k[m]) (G_n v_nl)_m.
  auto coupling = [&](int k, int l, Affine& re, Affine& im) {
    cd direct = 0.0;
    cvec c = cvec::Zero(M);
    for (int n = 0; n < N; ++n) {
      direct += ch.h_d_dl[n][k].dot(s.v_dl[n][l]);
      c += ch.h_r_dl[k].conjugate().cwiseProduct(ch.g_dl[n] * s.v_dl[n][l]);
    }
    direct += d.conjugate().cwiseProduct(c).sum();
    re = Affine(direct.real() * inv_sigma);
    im = Affine(direct.imag() * inv_sigma);
    for (int m = 0; m < M; ++m) {
      const double cr = c[m].real() * inv_sigma / sc, ci = c[m].imag() * inv_sigma / sc;
      const int xr = ub + 2 * m, xi = xr + 1;
      // conj(u) c = (ur cr + ui ci) + j (ur ci - ui cr)
      re.terms.emplace_back(xr, cr);
      re.terms.emplace_back(xi, ci);
      im.terms.emplace_back(xr, ci);
      im.terms.emplace_back(xi, -cr);
    }
  };

  for (int k = 0; k < K; ++k) {
    if (!(s.a[k] > 0.0)) continue;
    Affine re, im;
    coupling(k, k, re, im);
    std::vector<Affine> cone{re * (1.0 / std::sqrt(cfg.sinr_target_lin[k])) - Affine::var(yv)};
    for (int l = 0; l < K; ++l) {
      if (l == k) continue;
      Affine lre, lim;
      coupling(k, l, lre, lim);
      cone.push_back(lre);
      cone.push_back(lim);
    }
    cone.push_back(Affine(1.0));
    b.add_soc(cone);
  }
  b.add_nonneg(Affine(y_cap) - Affine::var(yv));
  // e >= ||u||^2
  std::vector<Affine> rot{Affine::var(ev) + 1.0};
  for (int i = 0; i < 2 * M; ++i) rot.push_back(Affine::var(ub + i, 2.0));
  rot.push_back(Affine::var(ev) - 1.0);
  b.add_soc(rot);
  b.set_objective(Affine::var(ev, mu / (sc * sc)) - Affine::var(yv));

  const SolveReport rep = solve_conic(b.build());
  ThetaMatrixResult out;
  out.status = rep.status;
  if (rep.x.size() == b.n_vars()) {
    out.diag.resize(M);
    for (int m = 0; m < M; ++m)
      out.diag[m] = d[m] + cd(rep.x[ub + 2 * m], rep.x[ub + 2 * m + 1]) / sc;
    out.y = rep.x[yv];
  }
  return out;
}

PhaseResult solve_downlink_phase(const SolutionState& s, const SystemConfig& cfg,
                                 const ChannelSet& ch, const PenaltyParams& pp,
                                 bool feasibility_only) {
  pp.validate();
  PhaseResult res;
  res.theta = s.theta_dl;
  if (!any_offloading(s) || cfg.M() == 0) return res;

  const double slack0 = min_scaled_soc_slack(s.theta_dl, s, cfg, ch);
  res.slack_before = res.slack_after = slack0;
  res.status = PhaseStatus::unchanged;
  if (feasibility_only && slack0 >= 0.0) return res;

  rvec theta = s.theta_dl;
  // (Theta, y) = (diag(rho e^{j theta}), slack) is feasible for the first step.
  cvec x = reflection_vector(theta, cfg.phase);
  double y = slack0;
  rvec best = theta;
  double best_slack = slack0;
  double mu = pp.mu0;
  bool converged = false;

  auto consider = [&](const rvec& th) {
    const double sl = min_scaled_soc_slack(th, s, cfg, ch);
    if (sl > best_slack) {
      best_slack = sl;
      best = th;
    }
    return sl;
  };
  auto fit_of = [&](const rvec& th) { return (x - reflection_vector(th, cfg.phase)).squaredNorm(); };

  for (int outer = 0; outer < pp.max_outer; ++outer) {
    res.outer_iters = outer + 1;
    res.mu_trace.push_back(mu);
    double prev = y - mu * fit_of(theta);
    bool failed = false;
    for (int inner = 0; inner < pp.max_inner; ++inner) {
      theta = fit_theta_step(theta, x, cfg.phase);
      const double sl = consider(theta);
      if (feasibility_only && sl >= 0.0) {
        res.theta = theta;
        res.slack_after = sl;
        res.status = PhaseStatus::improved;
        return res;
      }
      const ThetaMatrixResult tm = theta_matrix_step(theta, s, cfg, ch, mu, pp.y_cap);
      ++res.conic_solves;
      if ((tm.status != SolveStatus::optimal && tm.status != SolveStatus::max_iters) ||
          tm.diag.size() != cfg.M() || !tm.diag.allFinite() || !std::isfinite(tm.y)) {
        failed = true;
        break;
      }
      x = tm.diag;
      y = tm.y;
      const double obj = y - mu * fit_of(theta);
      const bool small = (obj - prev) < pp.eps2 * std::max(std::abs(prev), 1e-12);
      prev = obj;
      if (small) break;
    }
    if (failed) break;
    theta = fit_theta_step(theta, x, cfg.phase);
    const double sl = consider(theta);
    if (feasibility_only && sl >= 0.0) {
      res.theta = theta;
      res.slack_after = sl;
      res.status = PhaseStatus::improved;
      return res;
    }
    res.fit_residual = fit_of(theta);
    if (res.fit_residual <= pp.eps1) {
      converged = true;
      break;
    }
    mu *= pp.growth;
  }

  if (best_slack >= slack0) {
    res.theta = best;
    res.slack_after = best_slack;
  }
  if (best_slack > slack0)
    res.status = converged ? PhaseStatus::improved : PhaseStatus::capped;
  else
    res.status = converged ? PhaseStatus::unchanged : PhaseStatus::capped;
  return res;
}

}  // namespace rismec
