#include "fvi/net.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace fvi::net;

void BM_ForwardBackward(benchmark::State& state) {
  const int B = static_cast<int>(state.range(0));
  const MlpSpec spec{{784, 50, 50, 10}};
  const WeightVector w = init_weights(spec, 1);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(784, B);
  const Eigen::MatrixXd upstream = Eigen::MatrixXd::Random(10, B);
  for (auto _ : state) {
    const ForwardCache cache = forward(spec, w, x);
    benchmark::DoNotOptimize(backward(spec, w, cache, upstream, false));
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_ForwardBackward)->Arg(1)->Arg(256)->Arg(1024);

}  // namespace
