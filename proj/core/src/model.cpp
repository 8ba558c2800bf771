#include "rismec/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rismec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument(field + ": " + what);
}

std::string pair_name(int n, int k) {
  std::ostringstream os;
  os << "(n=" << n << ", k=" << k << ")";
  return os.str();
}

// Uplink rate that treats a zero receive beamformer as "not decodable".
double safe_rate(const SolutionState& s, const SystemConfig& cfg, const ChannelTable& iota_ul,
                 int n, int k) {
  if (s.v_ul[n][k].squaredNorm() == 0.0) return 0.0;
  return rate_from_sinr(uplink_sinr(s, cfg, iota_ul, n, k), cfg);
}

}  // namespace

// ---------------------------------------------------------------------------
// SystemConfig / ChannelSet / SolutionState

SystemConfig SystemConfig::paper_defaults(int n_aps, int n_users, int n_antennas, int n_elements) {
  SystemConfig c;
  c.n_aps = n_aps;
  c.n_users = n_users;
  c.n_antennas = n_antennas;
  c.n_elements = n_elements;
  c.user_power_w.assign(n_users, 0.5);
  c.sinr_target_lin.assign(n_users, 10.0);
  return c;
}

SystemConfig SystemConfig::desk_defaults() {
  SystemConfig c = paper_defaults(3, 4, 2, 8);
  // -80 dBm; see README "Noise calibration".
  c.noise_user_w = 1e-11;
  return c;
}

void SystemConfig::set_uniform_sinr_target(double lin) { sinr_target_lin.assign(n_users, lin); }
void SystemConfig::set_uniform_user_power(double w) { user_power_w.assign(n_users, w); }

void SystemConfig::validate() const {
  require(n_aps >= 1, "n_aps", "must be >= 1");
  require(n_users >= 1, "n_users", "must be >= 1");
  require(n_antennas >= 1, "n_antennas", "must be >= 1");
  require(n_elements >= 1, "n_elements", "must be >= 1");
  require(bandwidth_hz > 0, "bandwidth_hz", "must be > 0");
  require(static_cast<int>(user_power_w.size()) == n_users, "user_power_w",
          "needs one entry per user");
  for (double p : user_power_w) require(p > 0, "user_power_w", "must be > 0");
  require(ap_max_power_w > 0, "ap_max_power_w", "must be > 0");
  require(cycles_per_bit > 0, "cycles_per_bit", "must be > 0");
  require(kappa_user > 0, "kappa_user", "must be > 0");
  require(kappa_ap > 0, "kappa_ap", "must be > 0");
  require(ap_total_freq_hz > 0, "ap_total_freq_hz", "must be > 0");
  require(slot_s > 0, "slot_s", "must be > 0");
  require(latency_cap_s > 0 && latency_cap_s < slot_s, "latency_cap_s", "must lie in (0, slot_s)");
  require(task_bits > 0, "task_bits", "must be > 0");
  require(static_cast<int>(sinr_target_lin.size()) == n_users, "sinr_target_lin",
          "needs one entry per user");
  for (double g : sinr_target_lin) require(g > 0, "sinr_target_lin", "must be > 0");
  require(noise_ap_w > 0, "noise_ap_w", "must be > 0");
  require(noise_user_w > 0, "noise_user_w", "must be > 0");
  require(phase.beta_min >= 0 && phase.beta_min <= 1, "phase.beta_min", "must lie in [0, 1]");
  require(phase.alpha >= 0, "phase.alpha", "must be >= 0");
  if (group_budget) require(*group_budget > 0, "group_budget", "must be > 0");
}

void ChannelSet::validate(const SystemConfig& cfg) const {
  const int N = cfg.N(), K = cfg.K(), L = cfg.L(), M = cfg.M();
  auto check_dir = [&](const std::vector<std::vector<cvec>>& hd, const std::vector<cvec>& hr,
                       const std::vector<cmat>& g, const char* tag) {
    const std::string t(tag);
    require(static_cast<int>(hd.size()) == N, "h_d_" + t, "expected N rows");
    for (const auto& row : hd) {
      require(static_cast<int>(row.size()) == K, "h_d_" + t, "expected K entries per AP");
      for (const auto& v : row) {
        require(v.size() == L, "h_d_" + t, "expected length L");
        require(v.allFinite(), "h_d_" + t, "non-finite entry");
      }
    }
    require(static_cast<int>(hr.size()) == K, "h_r_" + t, "expected K entries");
    for (const auto& v : hr) {
      require(v.size() == M, "h_r_" + t, "expected length M");
      require(v.allFinite(), "h_r_" + t, "non-finite entry");
    }
    require(static_cast<int>(g.size()) == N, "g_" + t, "expected N entries");
    for (const auto& m : g) {
      require(m.rows() == M && m.cols() == L, "g_" + t, "expected M x L");
      require(m.allFinite(), "g_" + t, "non-finite entry");
    }
  };
  check_dir(h_d_ul, h_r_ul, g_ul, "ul");
  check_dir(h_d_dl, h_r_dl, g_dl, "dl");
}

ChannelSet ChannelSet::without_ris() const {
  ChannelSet c = *this;
  for (auto& v : c.h_r_ul) v.setZero();
  for (auto& v : c.h_r_dl) v.setZero();
  return c;
}

SolutionState SolutionState::zeros(const SystemConfig& cfg) {
  const int N = cfg.N(), K = cfg.K(), L = cfg.L(), M = cfg.M();
  SolutionState s;
  s.v_ul.assign(N, std::vector<cvec>(K, cvec::Zero(L)));
  s.v_dl.assign(N, std::vector<cvec>(K, cvec::Zero(L)));
  s.theta_ul = rvec::Zero(M);
  s.theta_dl = rvec::Zero(M);
  s.a = rvec::Zero(K);
  s.t = rvec::Zero(K);
  s.r = rvec::Zero(K);
  s.f_nk = rmat::Zero(N, K);
  s.f_min = rvec::Zero(K);
  return s;
}

double ConstraintReport::min_residual() const {
  double m = group_budget;
  auto fold = [&](const auto& x) {
    if (x.size() > 0) m = std::min(m, x.minCoeff());
  };
  fold(partition);
  fold(latency);
  fold(downlink_sinr);
  fold(ap_power);
  fold(phase_model);
  fold(time_budget);
  fold(rate_floor);
  fold(freq_floor);
  fold(freq_capacity);
  return m;
}

std::string ConstraintReport::worst_family() const {
  std::string name = "group_budget";
  double m = group_budget;
  auto fold = [&](const auto& x, const char* tag) {
    if (x.size() > 0 && x.minCoeff() < m) {
      m = x.minCoeff();
      name = tag;
    }
  };
  fold(partition, "partition");
  fold(latency, "latency");
  fold(downlink_sinr, "downlink_sinr");
  fold(ap_power, "ap_power");
  fold(phase_model, "phase_model");
  fold(time_budget, "time_budget");
  fold(rate_floor, "rate_floor");
  fold(freq_floor, "freq_floor");
  fold(freq_capacity, "freq_capacity");
  return name;
}

// ---------------------------------------------------------------------------
// Reflection model and channels

double amplitude(double theta, const PhaseParams& pp) {
  const double base = (std::sin(theta - pp.phi) + 1.0) / 2.0;
  return (1.0 - pp.beta_min) * std::pow(base, pp.alpha) + pp.beta_min;
}

cd reflection(double theta, const PhaseParams& pp) {
  return amplitude(theta, pp) * std::polar(1.0, theta);
}

cd reflection_derivative(double theta, const PhaseParams& pp) {
  const double base = (std::sin(theta - pp.phi) + 1.0) / 2.0;
  double drho = 0.0;
  if (pp.alpha != 0.0 && (base > 0.0 || pp.alpha >= 1.0)) {
    drho = (1.0 - pp.beta_min) * pp.alpha * std::pow(base, pp.alpha - 1.0) *
           std::cos(theta - pp.phi) / 2.0;
  }
  const cd e = std::polar(1.0, theta);
  return drho * e + cd(0.0, 1.0) * amplitude(theta, pp) * e;
}

double wrap_phase(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0) w += kTwoPi;
  if (w >= kTwoPi) w -= kTwoPi;
  return w;
}

cvec effective_channel(const ChannelSet& ch, const rvec& theta, const PhaseParams& pp,
                       Direction dir, int n, int k) {
  const bool up = dir == Direction::uplink;
  const auto& hd = up ? ch.h_d_ul : ch.h_d_dl;
  const auto& hr = up ? ch.h_r_ul : ch.h_r_dl;
  const auto& g = up ? ch.g_ul : ch.g_dl;
  if (n < 0 || n >= static_cast<int>(hd.size()) || k < 0 || k >= static_cast<int>(hr.size()))
    throw std::invalid_argument("effective_channel: index out of range");
  const cmat& G = g[n];
  if (theta.size() != G.rows() || hr[k].size() != G.rows() || hd[n][k].size() != G.cols())
    throw std::invalid_argument("effective_channel: dimension mismatch");
  cvec refl(G.rows());
  for (int m = 0; m < G.rows(); ++m) refl[m] = reflection(theta[m], pp) * hr[k][m];
  return hd[n][k] + G.adjoint() * refl;
}

ChannelTable effective_channels(const ChannelSet& ch, const rvec& theta, const PhaseParams& pp,
                                Direction dir) {
  const bool up = dir == Direction::uplink;
  const auto& hd = up ? ch.h_d_ul : ch.h_d_dl;
  const auto& hr = up ? ch.h_r_ul : ch.h_r_dl;
  const auto& g = up ? ch.g_ul : ch.g_dl;
  const int N = static_cast<int>(hd.size());
  const int K = static_cast<int>(hr.size());
  const int M = static_cast<int>(theta.size());
  cvec phase(M);
  for (int m = 0; m < M; ++m) phase[m] = reflection(theta[m], pp);
  ChannelTable out(N, std::vector<cvec>(K));
  for (int n = 0; n < N; ++n) {
    const cmat Gh = g[n].adjoint();
    for (int k = 0; k < K; ++k) out[n][k] = hd[n][k] + Gh * phase.cwiseProduct(hr[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SINR and rates

double uplink_power(const SolutionState& s, const SystemConfig& cfg, int k) {
  return s.a[k] * cfg.user_power_w[k];
}

double uplink_sinr(const SolutionState& s, const SystemConfig& cfg, const ChannelTable& iota_ul,
                   int n, int k) {
  const cvec& v = s.v_ul[n][k];
  const double vn = v.squaredNorm();
  if (vn == 0.0) throw DomainError("uplink_sinr: zero receive beamformer at " + pair_name(n, k));
  const double pk = uplink_power(s, cfg, k);
  if (pk == 0.0) return 0.0;
  double interf = cfg.noise_ap_w * vn;
  for (int l = 0; l < cfg.K(); ++l) {
    if (l == k) continue;
    interf += uplink_power(s, cfg, l) * std::norm(v.dot(iota_ul[n][l]));
  }
  return pk * std::norm(v.dot(iota_ul[n][k])) / interf;
}

double uplink_sinr(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch, int n,
                   int k) {
  return uplink_sinr(s, cfg, effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink), n,
                     k);
}

double downlink_sinr(const SolutionState& s, const SystemConfig& cfg, const ChannelTable& iota_dl,
                     int k) {
  double interf = cfg.noise_user_w;
  cd signal = 0.0;
  for (int l = 0; l < cfg.K(); ++l) {
    cd acc = 0.0;
    for (int n = 0; n < cfg.N(); ++n) acc += iota_dl[n][k].dot(s.v_dl[n][l]);
    if (l == k)
      signal = acc;
    else
      interf += std::norm(acc);
  }
  return std::norm(signal) / interf;
}

double downlink_sinr(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                     int k) {
  return downlink_sinr(s, cfg, effective_channels(ch, s.theta_dl, cfg.phase, Direction::downlink),
                       k);
}

double rate_from_sinr(double sinr, const SystemConfig& cfg) {
  return cfg.bandwidth_hz * std::log2(1.0 + sinr);
}

double offload_rate(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch, int n,
                    int k) {
  return rate_from_sinr(uplink_sinr(s, cfg, ch, n, k), cfg);
}

double local_rate(double a_k, const SystemConfig& cfg, int k) {
  const double frac = std::max(0.0, 1.0 - a_k);
  return std::sqrt(frac * cfg.user_power_w[k] / cfg.kappa_user) / cfg.cycles_per_bit;
}

// ---------------------------------------------------------------------------
// Association, power, latency, objectives

double group_norm(const SolutionState& s) {
  double total = 0.0;
  for (std::size_t n = 0; n < s.v_dl.size(); ++n)
    for (std::size_t k = 0; k < s.v_dl[n].size(); ++k)
      total += std::sqrt(s.v_dl[n][k].squaredNorm() + s.v_ul[n][k].squaredNorm());
  return total;
}

Association association(const SolutionState& s) {
  const int N = static_cast<int>(s.v_dl.size());
  const int K = N > 0 ? static_cast<int>(s.v_dl[0].size()) : 0;
  rmat norms(N, K);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      norms(n, k) = std::sqrt(s.v_dl[n][k].squaredNorm() + s.v_ul[n][k].squaredNorm());
  Association a;
  const double peak = norms.size() > 0 ? norms.maxCoeff() : 0.0;
  a.serving = (norms.array() > kSparsityThreshold * peak) && (norms.array() > 0.0);
  return a;
}

double total_power(const SolutionState& s, const SystemConfig& cfg, const Association& assoc) {
  double p = 0.0;
  for (int k = 0; k < cfg.K(); ++k) p += cfg.user_power_w[k];
  for (int n = 0; n < cfg.N(); ++n)
    for (int k = 0; k < cfg.K(); ++k) {
      if (!assoc.serving(n, k)) continue;
      p += s.v_dl[n][k].squaredNorm() +
           cfg.cycles_per_bit * s.t[k] * s.r[k] * s.f_nk(n, k) * cfg.kappa_ap / cfg.slot_s;
    }
  return p;
}

double latency(const SolutionState& s, const SystemConfig& cfg, int n, int k) {
  if (!(s.r[k] > 0.0)) throw DomainError("latency: nonpositive rate for user " + pair_name(n, k));
  if (!(s.f_nk(n, k) > 0.0))
    throw DomainError("latency: nonpositive frequency at " + pair_name(n, k));
  // Bits left for offloading; local computing may already cover the task.
  const double left = std::max(0.0, cfg.task_bits - cfg.slot_s * local_rate(s.a[k], cfg, k));
  return left / s.r[k] + cfg.cycles_per_bit * left / s.f_nk(n, k);
}

double computation_efficiency(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                              const Association& assoc) {
  const ChannelTable iota = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  double num = 0.0;
  for (int k = 0; k < cfg.K(); ++k) {
    num += local_rate(s.a[k], cfg, k);
    if (!assoc.any_for_user(k)) {
      if (s.a[k] > 0.0)
        throw DomainError("computation_efficiency: user " + std::to_string(k) +
                          " offloads without a serving AP");
      continue;
    }
    double rmin = std::numeric_limits<double>::infinity();
    for (int n = 0; n < cfg.N(); ++n)
      if (assoc.serving(n, k)) rmin = std::min(rmin, safe_rate(s, cfg, iota, n, k));
    num += s.t[k] * rmin / cfg.slot_s;
  }
  return num / total_power(s, cfg, assoc);
}

double computation_efficiency(const SolutionState& s, const SystemConfig& cfg,
                              const ChannelSet& ch) {
  return computation_efficiency(s, cfg, ch, association(s));
}

double p2_objective(const SolutionState& s, const SystemConfig& cfg, const Association& assoc) {
  double num = 0.0;
  for (int k = 0; k < cfg.K(); ++k) {
    num += local_rate(s.a[k], cfg, k);
    if (assoc.any_for_user(k)) num += s.t[k] * s.r[k] / cfg.slot_s;
  }
  return num / total_power(s, cfg, assoc);
}

double barrier_objective(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                         const Association& assoc, double w) {
  const ChannelTable iota = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  double barrier = 0.0;
  for (int n = 0; n < cfg.N(); ++n)
    for (int k = 0; k < cfg.K(); ++k) {
      if (!assoc.serving(n, k)) continue;
      const double gap = safe_rate(s, cfg, iota, n, k) - s.r[k];
      if (!(gap > 0.0))
        throw DomainError("barrier_objective: R_nk <= r_k at " + pair_name(n, k));
      barrier += std::log(gap);
    }
  return p2_objective(s, cfg, assoc) + barrier / w;
}

double barrier_objective(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch,
                         double w) {
  return barrier_objective(s, cfg, ch, association(s), w);
}

double soc_slack(const SolutionState& s, const SystemConfig& cfg, const ChannelTable& iota_dl,
                 int k) {
  double interf = cfg.noise_user_w;
  cd signal = 0.0;
  for (int l = 0; l < cfg.K(); ++l) {
    cd acc = 0.0;
    for (int n = 0; n < cfg.N(); ++n) acc += iota_dl[n][k].dot(s.v_dl[n][l]);
    if (l == k)
      signal = acc;
    else
      interf += std::norm(acc);
  }
  return signal.real() / std::sqrt(cfg.sinr_target_lin[k]) - std::sqrt(interf);
}

double soc_slack(const SolutionState& s, const SystemConfig& cfg, const ChannelSet& ch, int k) {
  return soc_slack(s, cfg, effective_channels(ch, s.theta_dl, cfg.phase, Direction::downlink), k);
}

ConstraintReport constraint_report(const SolutionState& s, const SystemConfig& cfg,
                                   const ChannelSet& ch) {
  const int N = cfg.N(), K = cfg.K(), M = cfg.M();
  const Association assoc = association(s);
  const ChannelTable iota_ul = effective_channels(ch, s.theta_ul, cfg.phase, Direction::uplink);
  const ChannelTable iota_dl = effective_channels(ch, s.theta_dl, cfg.phase, Direction::downlink);

  ConstraintReport rep;
  rep.partition.resize(K);
  rep.downlink_sinr = rvec::Constant(K, kInf);
  rep.time_budget = rvec::Constant(K, kInf);
  rep.latency = rmat::Constant(N, K, kInf);
  rep.rate_floor = rmat::Constant(N, K, kInf);
  rep.freq_floor = rmat::Constant(N, K, kInf);
  rep.ap_power.resize(N);
  rep.freq_capacity.resize(N);
  rep.phase_model.resize(2 * M);

  for (int k = 0; k < K; ++k) {
    rep.partition[k] = std::min(s.a[k], 1.0 - s.a[k]);
    if (s.a[k] > 0.0)
      rep.downlink_sinr[k] = downlink_sinr(s, cfg, iota_dl, k) - cfg.sinr_target_lin[k];
    if (assoc.any_for_user(k)) {
      const double fm = s.f_min[k];
      rep.time_budget[k] =
          fm > 0.0 ? cfg.slot_s - s.t[k] - cfg.cycles_per_bit * s.t[k] * s.r[k] / fm : -kInf;
      if (s.t[k] < 0.0) rep.time_budget[k] = std::min(rep.time_budget[k], s.t[k]);
    }
  }
  for (int n = 0; n < N; ++n) {
    double pw = 0.0, fsum = 0.0, fneg = kInf;
    for (int k = 0; k < K; ++k) {
      pw += s.v_dl[n][k].squaredNorm();
      fsum += s.f_nk(n, k);
      fneg = std::min(fneg, s.f_nk(n, k));
      if (!assoc.serving(n, k)) continue;
      rep.rate_floor(n, k) = safe_rate(s, cfg, iota_ul, n, k) - s.r[k];
      rep.freq_floor(n, k) = s.f_nk(n, k) - s.f_min[k];
      if (s.r[k] > 0.0 && s.f_nk(n, k) > 0.0)
        rep.latency(n, k) = cfg.latency_cap_s - latency(s, cfg, n, k);
      else
        rep.latency(n, k) = -kInf;
    }
    rep.ap_power[n] = cfg.ap_max_power_w - pw;
    rep.freq_capacity[n] = std::min(cfg.ap_total_freq_hz - fsum, fneg);
  }
  auto wrap_residual = [](double th) {
    if (!std::isfinite(th)) return -kInf;
    if (th < 0.0) return th;
    if (th >= kTwoPi) return kTwoPi - th;
    return 0.0;
  };
  for (int m = 0; m < M; ++m) {
    rep.phase_model[m] = wrap_residual(s.theta_ul[m]);
    rep.phase_model[M + m] = wrap_residual(s.theta_dl[m]);
  }
  if (cfg.group_budget) rep.group_budget = *cfg.group_budget - group_norm(s);
  return rep;
}

}  // namespace rismec
