#include "rismec/am_driver.hpp"
#include "rismec/blocks.hpp"
#include "rismec/channelgen.hpp"
#include "rismec/conic.hpp"
#include "rismec/downlink_phase.hpp"
#include "rismec/experiment.hpp"
#include "rismec/initializer.hpp"

#include <benchmark/benchmark.h>

using namespace rismec;

namespace {

struct Case {
  SystemConfig cfg;
  ChannelSet ch;
  InitResult init;
};

Case make_case(int N, int K, int M, std::uint64_t seed = 3) {
  SystemConfig c = SystemConfig::desk_defaults();
  c.n_aps = N;
  c.n_users = K;
  c.n_elements = M;
  c.set_uniform_user_power(0.5);
  c.set_uniform_sinr_target(1.0);
  const ChannelSet ch = generate_channels(c, place_network(c, child_seed(seed, 1)), child_seed(seed, 2));
  InitResult init = find_feasible(c, ch, seed);
  c.group_budget = init.derived_budget;
  return {c, ch, std::move(init)};
}

void BM_Model_CE(benchmark::State& st) {
  const Case c = make_case(3, 4, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(computation_efficiency(c.init.state, c.cfg, c.ch));
}
BENCHMARK(BM_Model_CE)->Arg(4)->Arg(8)->Arg(20);

void BM_Conic_RandomLp(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  Rng rng(1);
  std::normal_distribution<double> g;
  ConicBuilder b;
  const int x = b.add_vars(n);
  for (int i = 0; i < 3 * n; ++i) {
    Affine row(1.0 + std::abs(g(rng)));
    for (int j = 0; j < n; ++j) row -= Affine::var(x + j, g(rng));
    b.add_nonneg(row);
  }
  for (int j = 0; j < n; ++j) {
    b.add_nonneg(Affine::var(x + j) + 10.0);
    b.add_nonneg(10.0 - Affine::var(x + j));
  }
  Affine obj;
  for (int j = 0; j < n; ++j) obj += Affine::var(x + j, g(rng));
  b.set_objective(obj);
  const ConicProgram p = b.build();
  for (auto _ : st) benchmark::DoNotOptimize(solve_conic(p));
}
BENCHMARK(BM_Conic_RandomLp)->Arg(5)->Arg(20)->Arg(60);

template <BlockResult (*Fn)(SolutionState&, const SystemConfig&, const ChannelSet&,
                            const BlockOptions&)>
void BM_Block(benchmark::State& st) {
  const Case c = make_case(3, 4, 8);
  BlockOptions o;
  o.w = 10.0;
  for (auto _ : st) {
    SolutionState s = c.init.state;
    benchmark::DoNotOptimize(Fn(s, c.cfg, c.ch, o));
  }
}
BENCHMARK(BM_Block<update_downlink_beamformers>)->Name("BM_Block/v_dl")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Block<update_uplink_beamformers>)->Name("BM_Block/v_ul")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Block<update_uplink_phases>)->Name("BM_Block/theta_ul")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Block<update_power_partition>)->Name("BM_Block/a")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Block<update_rate_time>)->Name("BM_Block/r_t")->Unit(benchmark::kMillisecond);

void BM_DownlinkPhase(benchmark::State& st) {
  const Case c = make_case(3, 4, static_cast<int>(st.range(0)));
  PenaltyParams pp;
  pp.growth = 1.03;
  for (auto _ : st) benchmark::DoNotOptimize(solve_downlink_phase(c.init.state, c.cfg, c.ch, pp));
}
BENCHMARK(BM_DownlinkPhase)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Initializer(benchmark::State& st) {
  const Case c = make_case(3, 4, 8);
  for (auto _ : st) benchmark::DoNotOptimize(find_feasible(c.cfg, c.ch, 3));
}
BENCHMARK(BM_Initializer)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& st) {
  const Case c = make_case(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)), 8);
  SystemConfig cfg = c.cfg;
  cfg.group_budget.reset();
  const DriverOptions o = desk_driver_options();
  for (auto _ : st) benchmark::DoNotOptimize(solve(cfg, c.ch, o, 3));
}
BENCHMARK(BM_Solve)->Args({2, 2})->Args({3, 4})->Args({5, 10})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
