#include "block_common.hpp"

#include "rismec/armijo.hpp"

#include <numbers>

namespace rismec {

using namespace detail;

namespace {

SolutionState with_theta(const SolutionState& s, const rvec& theta) {
  SolutionState t = s;
  t.theta_ul = theta;
  return t;
}

}  // namespace

double uplink_phase_objective(const SolutionState& s, const SystemConfig& cfg,
                              const ChannelSet& ch, const Association& assoc, double w,
                              const rvec& theta_ul) {
  const ChannelTable iota = effective_channels(ch, theta_ul, cfg.phase, Direction::uplink);
  const SolutionState st = with_theta(s, theta_ul);
  double acc = 0.0;
  for (int n = 0; n < cfg.N(); ++n)
    for (int k = 0; k < cfg.K(); ++k) {
      if (!assoc.serving(n, k)) continue;
      if (st.v_ul[n][k].squaredNorm() == 0.0) return kNegInf;
      const double gap = rate_from_sinr(uplink_sinr(st, cfg, iota, n, k), cfg) - s.r[k];
      if (!(gap > 0.0)) return kNegInf;
      acc += std::log(gap);
    }
  return acc / w;
}

rvec uplink_phase_gradient(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                           const Association& assoc, double w, const rvec& theta_ul) {
  const int M = cfg.M(), K = cfg.K();
  const ChannelTable iota = effective_channels(ch, theta_ul, cfg.phase, Direction::uplink);
  cvec psi(M);
  for (int m = 0; m < M; ++m) psi[m] = reflection_derivative(theta_ul[m], cfg.phase);
  rvec grad = rvec::Zero(M);
  const double ln2 = std::numbers::ln2;
  for (int n = 0; n < cfg.N(); ++n)
    for (int k = 0; k < K; ++k) {
      if (!assoc.serving(n, k)) continue;
      const cvec& v = s.v_ul[n][k];
      const cvec Gv_conj = (ch.g_ul[n] * v).conjugate();
      std::vector<cd> u(K);
      for (int l = 0; l < K; ++l) u[l] = v.dot(iota[n][l]);
      double I = cfg.noise_ap_w * v.squaredNorm();
      rvec dI = rvec::Zero(M);
      for (int l = 0; l < K; ++l) {
        if (l == k) continue;
        const double pl = s.a[l] * cfg.user_power_w[l];
        I += pl * std::norm(u[l]);
        const cvec du = psi.cwiseProduct(ch.h_r_ul[l]).cwiseProduct(Gv_conj);
        dI += pl * 2.0 * (std::conj(u[l]) * du.array()).real().matrix();
      }
      const double pk = s.a[k] * cfg.user_power_w[k];
      const cvec duk = psi.cwiseProduct(ch.h_r_ul[k]).cwiseProduct(Gv_conj);
      const rvec dnum = 2.0 * (std::conj(u[k]) * duk.array()).real().matrix();
      const double num = std::norm(u[k]);
      const double gamma = pk * num / I;
      const rvec dgamma = pk * (dnum * I - num * dI) / (I * I);
      const double rate = rate_from_sinr(gamma, cfg);
      const double gap = rate - s.r[k];
      grad += (cfg.bandwidth_hz / ((1.0 + gamma) * ln2 * gap)) * dgamma;
    }
  return grad / w;
}

double uplink_phase_gradient(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                             double w, int m) {
  if (m < 0 || m >= cfg.M()) throw std::invalid_argument("uplink_phase_gradient: bad element");
  return uplink_phase_gradient(s, cfg, ch, association(s), w, s.theta_ul)[m];
}

BlockResult update_uplink_phases(SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                                 const BlockOptions& opts) {
  BlockResult res;
  const Association assoc = serving_set(s, opts);
  res.before = safe_barrier(s, cfg, ch, assoc, opts.w);
  if (assoc.count() == 0 || cfg.M() == 0) {
    res.after = res.before;
    res.detail = "nothing to optimize";
    return res;
  }
  // Descend on -sum log(R - r); the 1/w factor only rescales the step.
  auto fg = [&](const rvec& th, rvec* g) {
    const double f = uplink_phase_objective(s, cfg, ch, assoc, 1.0, th);
    if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
    if (g) *g = -uplink_phase_gradient(s, cfg, ch, assoc, 1.0, th);
    return -f;
  };
  rvec g0(cfg.M());
  const double f0 = fg(s.theta_ul, &g0);
  if (!std::isfinite(f0)) {
    res.status = BlockStatus::failed;
    res.detail = "incumbent outside the barrier domain";
    return res;
  }
  const double gmax = g0.lpNorm<Eigen::Infinity>();
  if (gmax == 0.0) {
    res.after = res.before;
    res.detail = "zero gradient";
    return res;
  }
  ArmijoOptions ao;
  ao.max_iters = 100;
  ao.grad_tol = 1e-8;
  ao.initial_step = 0.1 / gmax;
  const ArmijoResult ar = armijo_descent(fg, s.theta_ul, ao);
  res.inner_iters = ar.iterations;
  if (ar.status == ArmijoStatus::aborted) {
    res.status = BlockStatus::failed;
    res.detail = ar.diagnostic;
    return res;
  }
  SolutionState cand = s;
  cand.theta_ul = ar.x.unaryExpr([](double t) { return wrap_phase(t); });
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
