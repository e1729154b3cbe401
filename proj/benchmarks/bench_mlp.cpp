#include <benchmark/benchmark.h>

#include "cthp/mlp.hpp"

namespace {

void BM_forward(benchmark::State& state) {
  const auto net = cthp::init_weights({1, 60, 60, 60, 3}, 1);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::RowVectorXd ts = Eigen::RowVectorXd::LinSpaced(n, -1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cthp::forward(net, ts));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_forward)->Arg(128)->Arg(3001);

void BM_forward_with_tangent(benchmark::State& state) {
  const auto net = cthp::init_weights({1, 60, 60, 60, 3}, 1);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::RowVectorXd ts = Eigen::RowVectorXd::LinSpaced(n, -1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cthp::forward_with_input_derivative(net, ts));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_forward_with_tangent)->Arg(3001);

void BM_forward_backward(benchmark::State& state) {
  const auto net = cthp::init_weights({1, 60, 60, 60, 3}, 1);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::RowVectorXd ts = Eigen::RowVectorXd::LinSpaced(n, -1.0, 1.0);
  const Eigen::MatrixXd gv = Eigen::MatrixXd::Constant(3, n, 0.1);
  const Eigen::MatrixXd gd = Eigen::MatrixXd::Constant(3, n, 0.05);
  for (auto _ : state) {
    cthp::ForwardTape tape;
    benchmark::DoNotOptimize(cthp::forward_with_input_derivative(net, ts, &tape));
    benchmark::DoNotOptimize(cthp::backward(net, tape, gv, gd));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_forward_backward)->Arg(3001);

}  // namespace
