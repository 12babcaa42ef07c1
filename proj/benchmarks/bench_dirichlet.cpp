#include "fvi/dirichlet.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace fvi::dirichlet;

PredictionSet draw(int K, int M, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Eigen::VectorXd alpha(K);
  std::uniform_real_distribution<double> u(0.5, 5.0);
  for (int k = 0; k < K; ++k) alpha[k] = u(gen);
  const DirichletParams p(alpha);
  Eigen::MatrixXd s(K, M);
  for (int m = 0; m < M; ++m) s.col(m) = sample(p, gen);
  return smooth(PredictionSet(s), 1e-4);
}

void BM_EstimatePrecision(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const int M = static_cast<int>(state.range(1));
  const PredictionSet preds = draw(K, M, 1);
  const SimplexPoint mean = estimate_mean(preds);
  FitOptions options;
  options.z_min = K;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_precision(preds, mean, options));
}
BENCHMARK(BM_EstimatePrecision)->Args({2, 10})->Args({10, 10})->Args({10, 50})->Args({100, 10});

void BM_KlClosedForm(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const DirichletParams p(Eigen::VectorXd::LinSpaced(K, 0.5, 3.0));
  const DirichletParams q(Eigen::VectorXd::LinSpaced(K, 2.0, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(kl_closed_form(p, q));
}
BENCHMARK(BM_KlClosedForm)->Arg(2)->Arg(10)->Arg(100);

}  // namespace
