#include <benchmark/benchmark.h>

#include "cthp/simulate.hpp"

namespace {

void BM_simulate_platoon(benchmark::State& state) {
  const auto followers = static_cast<std::size_t>(state.range(0));
  const cthp::CthpParams params{0.0766, 0.2220, 1.16};
  cthp::PlatoonConfig cfg;
  cfg.leader = cthp::LeaderProfile::sinusoid_after_hold(20.0, 1.0, 0.25, 20.0);
  for (std::size_t i = 0; i < followers; ++i) {
    cfg.followers.push_back(params);
    cfg.initial_states.push_back(cthp::equilibrium_state(params, 20.0));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(cthp::simulate_platoon(cfg, 500.0));
  }
  state.SetItemsProcessed(state.iterations() * 50000 * followers);  // RK4 steps
}
BENCHMARK(BM_simulate_platoon)->Arg(1)->Arg(8);

}  // namespace
