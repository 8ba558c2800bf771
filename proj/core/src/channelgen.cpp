#include "rismec/channelgen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rismec {

Geometry place_network(const SystemConfig& cfg, const NetworkSpec& net, std::uint64_t seed) {
  Rng rng(child_seed(seed, 0x6e6574));
  std::uniform_real_distribution<double> u(0.0, net.region_side_m);
  Geometry g;
  g.ris_pos = net.ris_pos;
  g.ap_pos.reserve(cfg.N());
  for (int n = 0; n < cfg.N(); ++n) {
    const double x = u(rng);
    const double y = u(rng);
    g.ap_pos.push_back({x, y, net.ap_height_m});
  }
  g.user_pos.reserve(cfg.K());
  for (int k = 0; k < cfg.K(); ++k) {
    const double x = u(rng);
    const double y = u(rng);
    g.user_pos.push_back({x, y, net.user_height_m});
  }
  return g;
}

Geometry place_network(const SystemConfig& cfg, std::uint64_t seed) {
  return place_network(cfg, NetworkSpec{}, seed);
}

double distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double path_loss(double d, const LinkSpec& link, const FadingSpec& spec) {
  if (!(d > 0.0)) throw std::invalid_argument("path_loss: distance must be > 0");
  double g = spec.ref_loss * std::pow(d, -link.exponent);
  if (link.ris_gain) g *= spec.element_gain;
  return g;
}

cvec ula_response(int size, const Point3& from, const Point3& to) {
  const double d = distance(from, to);
  const double cosang = d > 0.0 ? (to[0] - from[0]) / d : 0.0;
  cvec a(size);
  for (int i = 0; i < size; ++i) a[i] = std::polar(1.0, std::numbers::pi * i * cosang);
  return a;
}

cmat rician_channel(int rows, int cols, double kappa, const cmat& los, double gain, Rng& rng) {
  if (kappa < 0.0) throw std::invalid_argument("rician_channel: kappa must be >= 0");
  if (gain < 0.0) throw std::invalid_argument("rician_channel: gain must be >= 0");
  if (los.rows() != rows || los.cols() != cols)
    throw std::invalid_argument("rician_channel: LoS block has the wrong shape");
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  cmat nlos(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      nlos(i, j) = cd(re, im);
    }
  const double wl = std::sqrt(kappa / (1.0 + kappa));
  const double wn = std::sqrt(1.0 / (1.0 + kappa));
  return std::sqrt(gain) * (wl * los + wn * nlos);
}

cmat rician_channel(int rows, int cols, double kappa, const cmat& los, double gain,
                    std::uint64_t seed) {
  Rng rng(seed);
  return rician_channel(rows, cols, kappa, los, gain, rng);
}

namespace {

struct DirectionDraw {
  std::vector<std::vector<cvec>> h_d;
  std::vector<cvec> h_r;
  std::vector<cmat> g;
};

DirectionDraw draw_direction(const SystemConfig& cfg, const Geometry& geo, const FadingSpec& spec,
                             Rng& rng) {
  const int N = cfg.N(), K = cfg.K(), L = cfg.L(), M = cfg.M();
  DirectionDraw out;
  out.g.resize(N);
  for (int n = 0; n < N; ++n) {
    const cvec a_ris = ula_response(M, geo.ris_pos, geo.ap_pos[n]);
    const cvec a_ap = ula_response(L, geo.ap_pos[n], geo.ris_pos);
    const cmat los = a_ris * a_ap.adjoint();
    const double gain = path_loss(distance(geo.ap_pos[n], geo.ris_pos), spec.ap_ris, spec);
    out.g[n] = rician_channel(M, L, spec.ap_ris.rician, los, gain, rng);
  }
  out.h_r.resize(K);
  for (int k = 0; k < K; ++k) {
    const cmat los = ula_response(M, geo.ris_pos, geo.user_pos[k]);
    const double gain = path_loss(distance(geo.ris_pos, geo.user_pos[k]), spec.ris_user, spec);
    out.h_r[k] = rician_channel(M, 1, spec.ris_user.rician, los, gain, rng).col(0);
  }
  out.h_d.assign(N, std::vector<cvec>(K));
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) {
      const cmat los = ula_response(L, geo.ap_pos[n], geo.user_pos[k]);
      const double gain = path_loss(distance(geo.ap_pos[n], geo.user_pos[k]), spec.ap_user, spec);
      out.h_d[n][k] = rician_channel(L, 1, spec.ap_user.rician, los, gain, rng).col(0);
    }
  return out;
}

}  // namespace

ChannelSet generate_channels(const SystemConfig& cfg, const Geometry& geo, const FadingSpec& spec,
                             std::uint64_t seed) {
  if (static_cast<int>(geo.ap_pos.size()) != cfg.N() ||
      static_cast<int>(geo.user_pos.size()) != cfg.K())
    throw std::invalid_argument("generate_channels: geometry does not match config");
  Rng up_rng(child_seed(seed, 1));
  DirectionDraw up = draw_direction(cfg, geo, spec, up_rng);
  DirectionDraw down;
  if (spec.reciprocal) {
    down = up;
  } else {
    Rng down_rng(child_seed(seed, 2));
    down = draw_direction(cfg, geo, spec, down_rng);
  }
  ChannelSet ch;
  ch.h_d_ul = std::move(up.h_d);
  ch.h_r_ul = std::move(up.h_r);
  ch.g_ul = std::move(up.g);
  ch.h_d_dl = std::move(down.h_d);
  ch.h_r_dl = std::move(down.h_r);
  ch.g_dl = std::move(down.g);
  return ch;
}

ChannelSet generate_channels(const SystemConfig& cfg, const Geometry& geo, std::uint64_t seed) {
  return generate_channels(cfg, geo, FadingSpec{}, seed);
}

}  // namespace rismec
