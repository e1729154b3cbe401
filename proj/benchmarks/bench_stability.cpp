#include <benchmark/benchmark.h>

#include "cthp/stability.hpp"

namespace {

void BM_bode_sweep(benchmark::State& state) {
  const cthp::CthpParams params{0.0612, 0.12, 1.19};
  const auto points = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cthp::bode_sweep(params, 0.01, 10.0, points));
  }
  state.SetItemsProcessed(state.iterations() * points);
}
BENCHMARK(BM_bode_sweep)->Arg(500)->Arg(20000);

void BM_hinf_norm(benchmark::State& state) {
  const cthp::CthpParams params{0.0104, 0.0718, 1.52};
  for (auto _ : state) {
    benchmark::DoNotOptimize(cthp::hinf_norm(params));
  }
}
BENCHMARK(BM_hinf_norm);

}  // namespace
