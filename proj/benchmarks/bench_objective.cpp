#include "fvi/data.hpp"
#include "fvi/objective.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

namespace {

using namespace fvi;

// One fELBO step of an MNIST-sized ensemble on a synthetic batch.
void BM_FelboStepEnsemble(benchmark::State& state) {
  const int B = static_cast<int>(state.range(0));
  const int members = static_cast<int>(state.range(1));
  const auto model = models::StochasticClassifier::ensemble(net::MlpSpec{{784, 50, 50, 10}}, members, 1);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(784, B);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(10, B);
  for (int n = 0; n < B; ++n) y(n % 10, n) = 1.0;
  std::vector<std::uint64_t> ids(static_cast<std::size_t>(B));
  std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  const objective::TrainBatch batch{x, y, ids};
  objective::FelboConfig config;
  config.samples = 0;
  const auto prior = priors::PriorSpec::uniform(10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(objective::felbo_step(model, batch, nullptr, prior, config, 60000, 0));
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_FelboStepEnsemble)->Args({256, 2})->Args({256, 10});

// The fKL term alone: Dirichlet fits at every measurement point.
void BM_FklEstimate(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const int M = static_cast<int>(state.range(1));
  const int K = 10;
  models::SampleBatch samples;
  for (int m = 0; m < M; ++m) {
    models::Sample s;
    s.cache.probs = net::softmax(Eigen::MatrixXd(3.0 * Eigen::MatrixXd::Random(K, L)));
    samples.samples.push_back(std::move(s));
  }
  std::vector<std::string> keys;
  for (int l = 0; l < L; ++l) keys.push_back(std::to_string(l));
  const objective::FelboConfig config;
  const auto prior = priors::PriorSpec::uniform(K);
  for (auto _ : state) {
    benchmark::DoNotOptimize(objective::fkl_estimate(samples, keys, prior, config, 60000, L));
  }
  state.SetItemsProcessed(state.iterations() * L);
}
BENCHMARK(BM_FklEstimate)->Args({256, 1})->Args({256, 10});

}  // namespace
