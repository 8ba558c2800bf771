#pragma once

#include "rismec/channelgen.hpp"
#include "rismec/config_io.hpp"
#include "rismec/experiment.hpp"

namespace rismec::testing {

struct Trial {
  SystemConfig cfg;
  ChannelSet ch;
};

// Same draw as one desk trial of the harness.
inline Trial desk_trial(std::uint64_t seed, double sinr_db = 0.0,
                        SystemConfig cfg = SystemConfig::desk_defaults()) {
  cfg.set_uniform_sinr_target(db_to_lin(sinr_db));
  const Geometry g = place_network(cfg, child_seed(seed, 1));
  return {cfg, generate_channels(cfg, g, child_seed(seed, 2))};
}

inline SystemConfig small_config(int N, int K, int L, int M) {
  SystemConfig p = SystemConfig::paper_defaults(N, K, L, M);
  p.noise_user_w = SystemConfig::desk_defaults().noise_user_w;
  return p;
}

}  // namespace rismec::testing
