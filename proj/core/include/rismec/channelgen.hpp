#pragma once

#include "rismec/rng.hpp"
#include "rismec/types.hpp"

#include <array>
#include <cstdint>

namespace rismec {

using Point3 = std::array<double, 3>;

struct Geometry {
  std::vector<Point3> ap_pos;
  std::vector<Point3> user_pos;
  Point3 ris_pos{100.0, 0.0, 15.0};
};

struct LinkSpec {
  double exponent = 2.0;  // path-loss exponent
  double rician = 0.0;    // linear LoS/NLoS power ratio
  bool ris_gain = false;  // apply the 3 dBi element gain
};

struct FadingSpec {
  double ref_loss = 1e-3;  // E0 at d0 = 1 m (-30 dB)
  double element_gain = 1.9952623149688795;  // 10^0.3
  LinkSpec ap_ris{2.0, 1000.0, true};
  LinkSpec ap_user{3.67, 0.0, false};
  LinkSpec ris_user{2.5, 3.0, true};
  /// Downlink reuses the uplink draws instead of independent fading.
  bool reciprocal = false;
};

struct NetworkSpec {
  double region_side_m = 200.0;
  double ap_height_m = 30.0;
  double user_height_m = 1.0;
  Point3 ris_pos{100.0, 0.0, 15.0};
};

Geometry place_network(const SystemConfig& cfg, const NetworkSpec& net, std::uint64_t seed);
Geometry place_network(const SystemConfig& cfg, std::uint64_t seed);

double distance(const Point3& a, const Point3& b);

/// Linear gain at distance d; throws std::invalid_argument for d <= 0.
double path_loss(double d, const LinkSpec& link, const FadingSpec& spec);

/// Unit-modulus half-wavelength ULA response along the x axis towards `dir`.
cvec ula_response(int size, const Point3& from, const Point3& to);

cmat rician_channel(int rows, int cols, double kappa, const cmat& los, double gain, Rng& rng);
cmat rician_channel(int rows, int cols, double kappa, const cmat& los, double gain,
                    std::uint64_t seed);

ChannelSet generate_channels(const SystemConfig& cfg, const Geometry& geo, const FadingSpec& spec,
                             std::uint64_t seed);
ChannelSet generate_channels(const SystemConfig& cfg, const Geometry& geo, std::uint64_t seed);

}  // namespace rismec
