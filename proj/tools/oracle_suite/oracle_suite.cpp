#include "oracle_suite.hpp"

#include "rismec/armijo.hpp"
#include "rismec/blocks.hpp"
#include "rismec/channelgen.hpp"
#include "rismec/conic.hpp"
#include "rismec/downlink_phase.hpp"
#include "rismec/oracle.hpp"
#include "rismec/results.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rismec::oracles {

namespace {

constexpr double kPi = std::numbers::pi;

cd cn(Rng& rng, double scale) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  return scale * cd(g(rng), g(rng));
}

double unif(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Scalar loop rho(theta) e^{j theta}, written out from the amplitude model.
cd loop_reflection(double th, const PhaseParams& pp) {
  const double base = (std::sin(th - pp.phi) + 1.0) / 2.0;
  const double rho = (1.0 - pp.beta_min) * std::pow(base, pp.alpha) + pp.beta_min;
  return cd(rho * std::cos(th), rho * std::sin(th));
}

double loop_rate(const Instance& in, double sinr) {
  return in.cfg.bandwidth_hz * std::log(1.0 + sinr) / std::log(2.0);
}

void finish(CheckResult& r) {
  r.passed = r.passed && std::isfinite(r.worst) && r.worst <= r.limit;
  std::ostringstream os;
  os << "worst " << format_value(r.worst) << " vs limit " << format_value(r.limit) << " over "
     << r.cases << " cases";
  if (!r.detail.empty()) os << "; " << r.detail;
  r.detail = os.str();
}

// Instance with a nonnegative barrier domain margin at theta +- h.
Instance phase_instance(Rng& rng, int M) {
  const int N = 1 + static_cast<int>(rng() % 2), K = 1 + static_cast<int>(rng() % 2);
  const int L = 1 + static_cast<int>(rng() % 2);
  return random_instance(rng, N, K, L, M);
}

}  // namespace

Instance random_instance(Rng& rng, int N, int K, int L, int M) {
  Instance in;
  in.cfg = SystemConfig::paper_defaults(N, K, L, M);
  in.cfg.noise_user_w = 1e-11;
  ChannelSet& ch = in.ch;
  auto fill_dir = [&](std::vector<std::vector<cvec>>& hd, std::vector<cvec>& hr,
                      std::vector<cmat>& g) {
    hd.assign(N, std::vector<cvec>(K, cvec(L)));
    for (auto& row : hd)
      for (auto& v : row)
        for (int l = 0; l < L; ++l) v[l] = cn(rng, 1e-3);
    hr.assign(K, cvec(M));
    for (auto& v : hr)
      for (int m = 0; m < M; ++m) v[m] = cn(rng, 1e-2);
    g.assign(N, cmat(M, L));
    for (auto& G : g)
      for (int m = 0; m < M; ++m)
        for (int l = 0; l < L; ++l) G(m, l) = cn(rng, 1e-2);
  };
  fill_dir(ch.h_d_ul, ch.h_r_ul, ch.g_ul);
  fill_dir(ch.h_d_dl, ch.h_r_dl, ch.g_dl);

  SolutionState& s = in.s;
  s = SolutionState::zeros(in.cfg);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < L; ++l) {
        s.v_ul[n][k][l] = cn(rng, 1.0);
        s.v_dl[n][k][l] = cn(rng, 0.1);
      }
  for (int m = 0; m < M; ++m) {
    s.theta_ul[m] = unif(rng, 0.0, 2 * kPi);
    s.theta_dl[m] = unif(rng, 0.0, 2 * kPi);
  }
  for (int k = 0; k < K; ++k) {
    s.a[k] = unif(rng, 0.1, 0.9);
    s.t[k] = unif(rng, 0.1, 0.4);
    for (int n = 0; n < N; ++n) s.f_nk(n, k) = unif(rng, 1e8, 3e8);
    s.f_min[k] = s.f_nk.col(k).minCoeff();
  }
  for (int k = 0; k < K; ++k) {
    double rmin = std::numeric_limits<double>::infinity();
    for (int n = 0; n < N; ++n) rmin = std::min(rmin, loop_rate(in, loop_uplink_sinr(in, n, k)));
    s.r[k] = 0.5 * rmin;
  }
  return in;
}

cd loop_effective(const ChannelSet& ch, const rvec& theta, const PhaseParams& pp, bool uplink,
                  int n, int k, int l) {
  const auto& hd = uplink ? ch.h_d_ul : ch.h_d_dl;
  const auto& hr = uplink ? ch.h_r_ul : ch.h_r_dl;
  const auto& g = uplink ? ch.g_ul : ch.g_dl;
  cd acc = hd[n][k][l];
  for (int m = 0; m < theta.size(); ++m)
    acc += std::conj(g[n](m, l)) * loop_reflection(theta[m], pp) * hr[k][m];
  return acc;
}

double loop_uplink_sinr(const Instance& in, int n, int k) {
  const SystemConfig& c = in.cfg;
  auto proj = [&](int j) {
    cd acc = 0.0;
    for (int l = 0; l < c.L(); ++l)
      acc += std::conj(in.s.v_ul[n][k][l]) * loop_effective(in.ch, in.s.theta_ul, c.phase, true, n, j, l);
    return std::norm(acc);
  };
  double vn = 0.0;
  for (int l = 0; l < c.L(); ++l) vn += std::norm(in.s.v_ul[n][k][l]);
  double den = c.noise_ap_w * vn;
  for (int j = 0; j < c.K(); ++j)
    if (j != k) den += in.s.a[j] * c.user_power_w[j] * proj(j);
  return in.s.a[k] * c.user_power_w[k] * proj(k) / den;
}

double loop_downlink_sinr(const Instance& in, int k) {
  const SystemConfig& c = in.cfg;
  double sig = 0.0, den = c.noise_user_w;
  for (int j = 0; j < c.K(); ++j) {
    cd acc = 0.0;
    for (int n = 0; n < c.N(); ++n)
      for (int l = 0; l < c.L(); ++l)
        acc += std::conj(loop_effective(in.ch, in.s.theta_dl, c.phase, false, n, k, l)) *
               in.s.v_dl[n][j][l];
    if (j == k)
      sig = std::norm(acc);
    else
      den += std::norm(acc);
  }
  return sig / den;
}

double loop_total_power(const Instance& in) {
  const SystemConfig& c = in.cfg;
  double p = 0.0;
  for (int k = 0; k < c.K(); ++k) p += c.user_power_w[k];
  for (int n = 0; n < c.N(); ++n)
    for (int k = 0; k < c.K(); ++k) {
      for (int l = 0; l < c.L(); ++l) p += std::norm(in.s.v_dl[n][k][l]);
      p += c.cycles_per_bit * in.s.t[k] * in.s.r[k] * in.s.f_nk(n, k) * c.kappa_ap / c.slot_s;
    }
  return p;
}

double loop_ce(const Instance& in) {
  const SystemConfig& c = in.cfg;
  double num = 0.0;
  for (int k = 0; k < c.K(); ++k) {
    num += std::sqrt((1.0 - in.s.a[k]) * c.user_power_w[k] / c.kappa_user) / c.cycles_per_bit;
    double rmin = std::numeric_limits<double>::infinity();
    for (int n = 0; n < c.N(); ++n) rmin = std::min(rmin, loop_rate(in, loop_uplink_sinr(in, n, k)));
    num += in.s.t[k] * rmin / c.slot_s;
  }
  return num / loop_total_power(in);
}

double loop_group_norm(const Instance& in) {
  double total = 0.0;
  for (int n = 0; n < in.cfg.N(); ++n)
    for (int k = 0; k < in.cfg.K(); ++k) {
      double sq = 0.0;
      for (int l = 0; l < in.cfg.L(); ++l)
        sq += std::norm(in.s.v_dl[n][k][l]) + std::norm(in.s.v_ul[n][k][l]);
      total += std::sqrt(sq);
    }
  return total;
}

CheckResult check_model_loops(int instances, std::uint64_t seed) {
  CheckResult r{"model.scalar_loops", true, 0.0, 1e-10, 0, ""};
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const int N = 1 + static_cast<int>(rng() % 2), K = 1 + static_cast<int>(rng() % 2);
    const int L = 1 + static_cast<int>(rng() % 2), M = 1 + static_cast<int>(rng() % 2);
    const Instance in = random_instance(rng, N, K, L, M);
    const Association all{BoolMat::Constant(N, K, true)};
    const ChannelTable ul = effective_channels(in.ch, in.s.theta_ul, in.cfg.phase, Direction::uplink);
    const ChannelTable dl = effective_channels(in.ch, in.s.theta_dl, in.cfg.phase, Direction::downlink);
    auto upd = [&](double got, double want) { r.worst = std::max(r.worst, rel_err(got, want)); };
    upd(total_power(in.s, in.cfg, all), loop_total_power(in));
    upd(computation_efficiency(in.s, in.cfg, in.ch, all), loop_ce(in));
    upd(group_norm(in.s), loop_group_norm(in));
    for (int k = 0; k < K; ++k) {
      upd(downlink_sinr(in.s, in.cfg, dl, k), loop_downlink_sinr(in, k));
      for (int n = 0; n < N; ++n) upd(uplink_sinr(in.s, in.cfg, ul, n, k), loop_uplink_sinr(in, n, k));
    }
    ++r.cases;
  }
  finish(r);
  return r;
}

CheckResult check_closed_form_constants() {
  CheckResult r{"model.closed_form_constants", true, 0.0, 0.0, 0, ""};
  SystemConfig c = SystemConfig::paper_defaults(1, 1, 1, 1);
  // 1e7 log2(11) and sqrt(0.5 / 1e-25) / 200, tolerances as absolute bands.
  const double rate = rate_from_sinr(10.0, c);
  const double local = local_rate(0.0, c, 0);
  const FadingSpec f;
  const double pl = path_loss(1.0, f.ap_ris, f);
  const bool ok = std::abs(rate - 3.4594e7) <= 1e3 && std::abs(local - 1.1180e10) <= 1e6 &&
                  std::abs(pl - 1.9953e-3) <= 1e-7;
  r.cases = 3;
  r.passed = ok;
  r.detail = "rate " + format_value(rate) + ", local " + format_value(local) + ", path loss " +
             format_value(pl);
  r.worst = ok ? 0.0 : 1.0;
  finish(r);
  return r;
}

CheckResult check_gradient_fd(int instances, std::uint64_t seed) {
  CheckResult r{"uplink_phase.gradient_fd", true, 0.0, 1e-5, 0, ""};
  Rng rng(seed);
  const double h = 1e-6;
  for (int i = 0; i < instances; ++i) {
    const int M = 1 + static_cast<int>(rng() % 8);
    const Instance in = phase_instance(rng, M);
    const Association all{BoolMat::Constant(in.cfg.N(), in.cfg.K(), true)};
    const double w = unif(rng, 0.5, 10.0);
    const rvec& th = in.s.theta_ul;
    const rvec g = uplink_phase_gradient(in.s, in.cfg, in.ch, all, w, th);
    rvec fd(M);
    for (int m = 0; m < M; ++m) {
      rvec p = th, q = th;
      p[m] += h;
      q[m] -= h;
      fd[m] = (uplink_phase_objective(in.s, in.cfg, in.ch, all, w, p) -
               uplink_phase_objective(in.s, in.cfg, in.ch, all, w, q)) /
              (2 * h);
    }
    r.worst = std::max(r.worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
    ++r.cases;
  }
  finish(r);
  return r;
}

namespace {

template <class F>
CheckResult perturbation_check(const char* name, int instances, std::uint64_t seed, F&& body) {
  CheckResult r{name, true, 0.0, 1e-10, 0, ""};
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const int N = 1 + static_cast<int>(rng() % 3), K = 1 + static_cast<int>(rng() % 3);
    const int L = 1 + static_cast<int>(rng() % 3), M = 1 + static_cast<int>(rng() % 4);
    const Instance in = random_instance(rng, N, K, L, M);
    // worst = largest relative increase of the surrogate under a perturbation.
    r.worst = std::max(r.worst, body(in));
    ++r.cases;
  }
  r.worst = std::max(r.worst, 0.0);
  finish(r);
  return r;
}

double gain(double perturbed, double best) {
  return (perturbed - best) / std::max(1.0, std::abs(best));
}

}  // namespace

CheckResult check_stationarity_s(int instances, std::uint64_t seed) {
  return perturbation_check("closed_form.s_star", instances, seed, [](const Instance& in) {
    const Association all{BoolMat::Constant(in.cfg.N(), in.cfg.K(), true)};
    const auto s_star = optimal_s(in.s, in.cfg, in.ch, all);
    double worst = -1.0;
    for (int n = 0; n < in.cfg.N(); ++n)
      for (int k = 0; k < in.cfg.K(); ++k) {
        const cd sv = s_star[n][k];
        const double best = uplink_qt_surrogate(in.s, in.cfg, in.ch, n, k, sv);
        for (cd f : {cd(1.01, 0), cd(0.99, 0), cd(1, 0.01), cd(1, -0.01)})
          worst = std::max(worst, gain(uplink_qt_surrogate(in.s, in.cfg, in.ch, n, k, sv * f), best));
      }
    return worst;
  });
}

CheckResult check_stationarity_o(int instances, std::uint64_t seed) {
  return perturbation_check("closed_form.o_star", instances, seed, [](const Instance& in) {
    const Association all{BoolMat::Constant(in.cfg.N(), in.cfg.K(), true)};
    const rmat o = optimal_o(in.s, in.cfg, in.ch, all);
    double worst = -1.0;
    for (int n = 0; n < in.cfg.N(); ++n)
      for (int k = 0; k < in.cfg.K(); ++k) {
        const double best = partition_qt_surrogate(in.s, in.cfg, in.ch, n, k, o(n, k));
        for (double f : {1.01, 0.99})
          worst = std::max(worst,
                           gain(partition_qt_surrogate(in.s, in.cfg, in.ch, n, k, o(n, k) * f), best));
      }
    return worst;
  });
}

CheckResult check_stationarity_z(int instances, std::uint64_t seed) {
  return perturbation_check("closed_form.z_star", instances, seed, [](const Instance& in) {
    const Association all{BoolMat::Constant(in.cfg.N(), in.cfg.K(), true)};
    const double z = optimal_z(in.s, in.cfg, all);
    const double best = dinkelbach_surrogate(in.s, in.cfg, all, z);
    double worst = -1.0;
    for (double f : {1.01, 0.99})
      worst = std::max(worst, gain(dinkelbach_surrogate(in.s, in.cfg, all, z * f), best));
    return worst;
  });
}

CheckResult check_conic_lp(int problems, std::uint64_t seed) {
  CheckResult r{"conic.lp_vertex_enumeration", true, 0.0, 1e-6, 0, ""};
  Rng rng(seed);
  for (int p = 0; p < problems; ++p) {
    const int d = 1 + static_cast<int>(rng() % 5);
    const int m = d + 3;
    // Rows a_i x <= b_i: m random ones through a slack around x0, plus a box.
    std::vector<rvec> A;
    std::vector<double> b;
    rvec x0(d);
    for (int j = 0; j < d; ++j) x0[j] = unif(rng, -1, 1);
    for (int i = 0; i < m; ++i) {
      rvec a(d);
      for (int j = 0; j < d; ++j) a[j] = unif(rng, -1, 1);
      A.push_back(a);
      b.push_back(a.dot(x0) + unif(rng, 0.1, 1.0));
    }
    for (int j = 0; j < d; ++j)
      for (double sgn : {1.0, -1.0}) {
        rvec a = rvec::Zero(d);
        a[j] = sgn;
        A.push_back(a);
        b.push_back(10.0);
      }
    rvec c(d);
    for (int j = 0; j < d; ++j) c[j] = unif(rng, -1, 1);

    // Vertex enumeration over every d-subset of rows.
    const int rows = static_cast<int>(A.size());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(d);
    for (int j = 0; j < d; ++j) idx[j] = j;
    while (true) {
      rmat S(d, d);
      rvec rhs(d);
      for (int j = 0; j < d; ++j) {
        S.row(j) = A[idx[j]].transpose();
        rhs[j] = b[idx[j]];
      }
      Eigen::FullPivLU<rmat> lu(S);
      if (lu.isInvertible()) {
        const rvec x = lu.solve(rhs);
        bool feas = true;
        for (int i = 0; i < rows && feas; ++i) feas = A[i].dot(x) <= b[i] + 1e-9;
        if (feas) best = std::min(best, c.dot(x));
      }
      int j = d - 1;
      while (j >= 0 && idx[j] == rows - d + j) --j;
      if (j < 0) break;
      ++idx[j];
      for (int q = j + 1; q < d; ++q) idx[q] = idx[q - 1] + 1;
    }

    ConicBuilder bld;
    const int x = bld.add_vars(d);
    for (int i = 0; i < rows; ++i) {
      Affine e(b[i]);
      for (int j = 0; j < d; ++j) e.terms.emplace_back(x + j, -A[i][j]);
      bld.add_nonneg(e);
    }
    Affine obj;
    for (int j = 0; j < d; ++j) obj.terms.emplace_back(x + j, c[j]);
    bld.set_objective(obj);
    const SolveReport rep = solve_conic(bld.build());
    const double got = rep.status == SolveStatus::optimal ? rep.objective
                                                          : std::numeric_limits<double>::infinity();
    r.worst = std::max(r.worst, std::abs(got - best) / std::max(1.0, std::abs(best)));
    ++r.cases;
  }
  finish(r);
  return r;
}

CheckResult check_conic_soc(int problems, std::uint64_t seed) {
  CheckResult r{"conic.soc_bisection", true, 0.0, 1e-6, 0, ""};
  Rng rng(seed);
  for (int p = 0; p < problems; ++p) {
    // min sgn * x  s.t.  ||a x - b|| <= t0, a scalar x.
    const int q = 2 + static_cast<int>(rng() % 3);
    rvec a(q), bv(q);
    for (int i = 0; i < q; ++i) {
      a[i] = unif(rng, -2, 2);
      bv[i] = unif(rng, -2, 2);
    }
    const double sgn = (rng() % 2) ? 1.0 : -1.0;
    const double xc = a.dot(bv) / a.squaredNorm();
    const double t0 = (a * xc - bv).norm() + unif(rng, 0.5, 2.0);
    auto g = [&](double x) { return (a * x - bv).norm() - t0; };
    // Root on the side the objective pushes towards.
    double inside = xc, outside = xc - sgn;
    while (g(outside) <= 0.0) outside = xc + 2.0 * (outside - xc);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (inside + outside);
      (g(mid) <= 0.0 ? inside : outside) = mid;
    }
    const double want = sgn * inside;

    ConicBuilder bld;
    const int x = bld.add_var();
    std::vector<Affine> cone{Affine(t0)};
    for (int i = 0; i < q; ++i) cone.push_back(Affine::var(x, a[i]) - bv[i]);
    bld.add_soc(cone);
    bld.set_objective(Affine::var(x, sgn));
    const SolveReport rep = solve_conic(bld.build());
    const double got = rep.status == SolveStatus::optimal ? rep.objective
                                                          : std::numeric_limits<double>::infinity();
    r.worst = std::max(r.worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    ++r.cases;
  }
  finish(r);
  return r;
}

CheckResult check_armijo_rosenbrock() {
  CheckResult r{"armijo.rosenbrock", true, 0.0, 1e-6, 1, ""};
  auto fg = [](const rvec& x, rvec* g) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    if (g) {
      (*g)[0] = -2.0 * a - 400.0 * x[0] * b;
      (*g)[1] = 200.0 * b;
    }
    return a * a + 100.0 * b * b;
  };
  rvec x0(2);
  x0 << -1.2, 1.0;
  ArmijoOptions o;
  o.max_iters = 20000;
  o.grad_tol = 1e-10;
  const ArmijoResult res = armijo_descent(fg, x0, o);
  r.worst = res.f;
  r.detail = "x = (" + format_value(res.x[0]) + ", " + format_value(res.x[1]) + ") after " +
             std::to_string(res.iterations) + " iterations";
  finish(r);
  return r;
}

CheckResult check_association_count() {
  CheckResult r{"oracle.association_count", true, 0.0, 0.0, 1, ""};
  const auto all = enumerate_associations(3, 3, true);
  r.worst = std::abs(static_cast<double>(all.size()) - 343.0);
  r.detail = std::to_string(all.size()) + " associations";
  finish(r);
  return r;
}

namespace {

// Grid best of f over [0, 2 pi) at `deg` resolution.
template <class F>
double grid_best(F&& f, double deg, double* arg = nullptr) {
  const int steps = static_cast<int>(std::lround(360.0 / deg));
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < steps; ++i) {
    const double th = i * deg * kPi / 180.0;
    const double v = f(th);
    if (v > best) {
      best = v;
      if (arg) *arg = th;
    }
  }
  return best;
}

}  // namespace

CheckResult check_uplink_phase_grid(int instances, std::uint64_t seed) {
  CheckResult r{"uplink_phase.grid_m1", true, 0.0, 1e-3, 0, ""};
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    Instance in = phase_instance(rng, 1);
    const Association all{BoolMat::Constant(in.cfg.N(), in.cfg.K(), true)};
    auto obj = [&](double th) {
      rvec t(1);
      t[0] = th;
      return uplink_phase_objective(in.s, in.cfg, in.ch, all, 1.0, t);
    };
    const double best = grid_best(obj, 0.5);
    BlockOptions bo;
    bo.w = 1.0;
    update_uplink_phases(in.s, in.cfg, in.ch, bo);
    const double got = obj(in.s.theta_ul[0]);
    r.worst = std::max(r.worst, best - got);
    ++r.cases;
  }
  finish(r);
  return r;
}

CheckResult check_downlink_phase_grid(int instances, std::uint64_t seed) {
  CheckResult r{"downlink_phase.grid_m1", true, 0.0, 1e-2, 0, ""};
  Rng rng(seed);
  PenaltyParams pp;
  pp.growth = 1.03;
  // eps1 = 0.1 stops the penalty path before the phase settles; run it out.
  pp.eps1 = 1e-4;
  for (int i = 0; i < instances; ++i) {
    Instance in = random_instance(rng, 1 + static_cast<int>(rng() % 2), 2, 2, 1);
    auto obj = [&](double th) {
      rvec t(1);
      t[0] = th;
      return min_scaled_soc_slack(t, in.s, in.cfg, in.ch);
    };
    const double best = grid_best(obj, 0.5);
    const PhaseResult res = solve_downlink_phase(in.s, in.cfg, in.ch, pp);
    r.worst = std::max(r.worst, best - obj(res.theta[0]));
    ++r.cases;
  }
  r.detail = "slack in noise-scaled units";
  finish(r);
  return r;
}

CheckResult check_fit_grid(int instances, std::uint64_t seed) {
  CheckResult r{"downlink_phase.fit_grid_m1", true, 0.0, 1e-4, 0, ""};
  Rng rng(seed);
  const PhaseParams pp;
  for (int i = 0; i < instances; ++i) {
    cvec x(1);
    x[0] = std::polar(unif(rng, 0.1, 1.2), unif(rng, 0, 2 * kPi));
    auto err = [&](double th) { return std::norm(x[0] - loop_reflection(th, pp)); };
    const double best = -grid_best([&](double th) { return -err(th); }, 0.1);
    rvec th0(1);
    th0[0] = unif(rng, 0, 2 * kPi);
    const rvec th = fit_theta_step(th0, x, pp);
    r.worst = std::max(r.worst, err(th[0]) - best);
    ++r.cases;
  }
  finish(r);
  return r;
}

CheckResult check_theta_matrix_limit(int instances, std::uint64_t seed) {
  CheckResult r{"downlink_phase.theta_matrix_mu_limit", true, 0.0, 1e-6, 0, ""};
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const Instance in = random_instance(rng, 2, 2, 2, 3);
    const rvec& th = in.s.theta_dl;
    const ThetaMatrixResult tm = theta_matrix_step(th, in.s, in.cfg, in.ch, 1e9);
    double e = 0.0;
    if (tm.diag.size() != th.size()) {
      e = std::numeric_limits<double>::infinity();
    } else {
      for (int m = 0; m < th.size(); ++m)
        e = std::max(e, std::abs(tm.diag[m] - loop_reflection(th[m], in.cfg.phase)));
      // Slack oracle: SOC form per user from the loop downlink terms.
      const double sigma = std::sqrt(in.cfg.noise_user_w);
      double slack = std::numeric_limits<double>::infinity();
      for (int k = 0; k < in.cfg.K(); ++k) {
        cd sig = 0.0;
        double den = in.cfg.noise_user_w;
        for (int j = 0; j < in.cfg.K(); ++j) {
          cd acc = 0.0;
          for (int n = 0; n < in.cfg.N(); ++n)
            for (int l = 0; l < in.cfg.L(); ++l)
              acc += std::conj(loop_effective(in.ch, th, in.cfg.phase, false, n, k, l)) *
                     in.s.v_dl[n][j][l];
          if (j == k)
            sig = acc;
          else
            den += std::norm(acc);
        }
        slack = std::min(slack, (sig.real() / std::sqrt(in.cfg.sinr_target_lin[k]) - std::sqrt(den)) / sigma);
      }
      e = std::max(e, std::abs(tm.y - slack) / std::max(1.0, std::abs(slack)));
    }
    r.worst = std::max(r.worst, e);
    ++r.cases;
  }
  finish(r);
  return r;
}

CheckResult check_channel_statistics(std::uint64_t seed) {
  CheckResult r{"channelgen.monte_carlo", true, 0.0, 0.0, 3, ""};
  std::ostringstream os;
  bool ok = true;

  // Mean user position over 1e4 placements.
  SystemConfig c = SystemConfig::paper_defaults(1, 1, 1, 1);
  const NetworkSpec net;
  double mx = 0.0, my = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const Geometry g = place_network(c, net, child_seed(seed, i));
    mx += g.user_pos[0][0];
    my += g.user_pos[0][1];
  }
  mx /= draws;
  my /= draws;
  const double sd = net.region_side_m / std::sqrt(12.0 * draws);
  const double zpos = std::max(std::abs(mx - 100.0), std::abs(my - 100.0)) / sd;
  ok = ok && zpos <= 3.0;
  os << "position z " << format_value(zpos);

  // Rayleigh entry variance.
  Rng rng(child_seed(seed, 0x52));
  const double gain_ref = 2.5e-4;
  double pw = 0.0;
  const int entries = 100000;
  const cmat zero = cmat::Zero(1, 1);
  for (int i = 0; i < entries; ++i) pw += std::norm(rician_channel(1, 1, 0.0, zero, gain_ref, rng)(0, 0));
  const double var_rel = std::abs(pw / entries - gain_ref) / gain_ref;
  ok = ok && var_rel <= 0.05;
  os << "; rayleigh var rel " << format_value(var_rel);

  // Mean AP-RIS entry power against the path loss.
  Geometry geo;
  geo.ap_pos = {{50.0, 80.0, 30.0}};
  geo.user_pos = {{120.0, 60.0, 1.0}};
  const FadingSpec f;
  double gp = 0.0;
  const int ens = 10000;
  for (int i = 0; i < ens; ++i) gp += std::norm(generate_channels(c, geo, f, child_seed(seed, 0x100 + i)).g_ul[0](0, 0));
  const double want = path_loss(distance(geo.ap_pos[0], geo.ris_pos), f.ap_ris, f);
  const double pow_rel = std::abs(gp / ens - want) / want;
  ok = ok && pow_rel <= 0.05;
  os << "; ap-ris power rel " << format_value(pow_rel);

  r.passed = ok;
  r.worst = ok ? 0.0 : 1.0;
  r.detail = os.str();
  finish(r);
  return r;
}

std::vector<CheckResult> run_all(std::uint64_t seed) {
  return {
      check_model_loops(100, child_seed(seed, 1)),
      check_closed_form_constants(),
      check_gradient_fd(100, child_seed(seed, 2)),
      check_stationarity_s(100, child_seed(seed, 3)),
      check_stationarity_o(100, child_seed(seed, 4)),
      check_stationarity_z(100, child_seed(seed, 5)),
      check_conic_lp(50, child_seed(seed, 6)),
      check_conic_soc(50, child_seed(seed, 7)),
      check_armijo_rosenbrock(),
      check_association_count(),
      check_uplink_phase_grid(20, child_seed(seed, 8)),
      check_downlink_phase_grid(10, child_seed(seed, 9)),
      check_fit_grid(50, child_seed(seed, 10)),
      check_theta_matrix_limit(10, child_seed(seed, 11)),
      check_channel_statistics(child_seed(seed, 12)),
  };
}

std::string to_csv(const std::vector<CheckResult>& results) {
  std::string out = "check,passed,worst,limit,cases,detail\n";
  for (const CheckResult& r : results) {
    std::string d = r.detail;
    std::replace(d.begin(), d.end(), ',', ';');
    out += r.name + ',' + (r.passed ? "1" : "0") + ',' + format_value(r.worst) + ',' +
           format_value(r.limit) + ',' + std::to_string(r.cases) + ',' + d + '\n';
  }
  return out;
}

}  // namespace rismec::oracles
