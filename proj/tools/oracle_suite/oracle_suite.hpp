#pragma once

// Independent reference checks. Every oracle here recomputes its quantity
// without calling the library routine under test.

#include "rismec/model.hpp"
#include "rismec/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rismec::oracles {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // largest error / gap seen
  double limit = 0.0;  // what `worst` was held to
  int cases = 0;
  std::string detail;
};

struct Instance {
  SystemConfig cfg;
  ChannelSet ch;
  SolutionState s;
};

/// Random channels and a random interior state where every pair serves,
/// r = 0.5 x the smallest serving uplink rate.
Instance random_instance(Rng& rng, int N, int K, int L, int M);

// Scalar-loop re-evaluations.
cd loop_effective(const ChannelSet& ch, const rvec& theta, const PhaseParams& pp, bool uplink,
                  int n, int k, int l);
double loop_uplink_sinr(const Instance& in, int n, int k);
double loop_downlink_sinr(const Instance& in, int k);
double loop_total_power(const Instance& in);
double loop_ce(const Instance& in);
double loop_group_norm(const Instance& in);

CheckResult check_model_loops(int instances, std::uint64_t seed);
CheckResult check_closed_form_constants();
CheckResult check_gradient_fd(int instances, std::uint64_t seed);
CheckResult check_stationarity_s(int instances, std::uint64_t seed);
CheckResult check_stationarity_o(int instances, std::uint64_t seed);
CheckResult check_stationarity_z(int instances, std::uint64_t seed);
CheckResult check_conic_lp(int problems, std::uint64_t seed);
CheckResult check_conic_soc(int problems, std::uint64_t seed);
CheckResult check_armijo_rosenbrock();
CheckResult check_association_count();
CheckResult check_uplink_phase_grid(int instances, std::uint64_t seed);
CheckResult check_downlink_phase_grid(int instances, std::uint64_t seed);
CheckResult check_fit_grid(int instances, std::uint64_t seed);
CheckResult check_theta_matrix_limit(int instances, std::uint64_t seed);
CheckResult check_channel_statistics(std::uint64_t seed);

/// Everything above with the default case counts.
std::vector<CheckResult> run_all(std::uint64_t seed = 7);

/// check,passed,worst,limit,cases,detail
std::string to_csv(const std::vector<CheckResult>& results);

}  // namespace rismec::oracles
