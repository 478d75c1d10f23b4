#include <benchmark/benchmark.h>

#include "anovagp/anova.hpp"
#include "anovagp/diffusion.hpp"
#include "anovagp/gp.hpp"
#include "anovagp/pca.hpp"
#include "anovagp/rng.hpp"
#include "anovagp/sim_cache.hpp"

using namespace anovagp;

static void BM_DiffusionSolve(benchmark::State& state) {
  const auto elements = static_cast<std::size_t>(state.range(0));
  DiffusionSimulator sim({elements, 6});
  Rng rng(1);
  const Eigen::VectorXd xi = sim.inputs().sample(rng);
  for (auto _ : state) benchmark::DoNotOptimize(sim.evaluate(xi));
}
BENCHMARK(BM_DiffusionSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_NlmlGradient(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Rng rng(2);
  Eigen::MatrixXd x(n, 9);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  Eigen::VectorXd y = x.rowwise().sum().array().sin();
  const Hyperparameters h{Eigen::VectorXd::Zero(9), 0.0, -10.0};
  for (auto _ : state) benchmark::DoNotOptimize(nlml_gradient(h, x, y));
}
BENCHMARK(BM_NlmlGradient)->Arg(30)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_PcaGram(benchmark::State& state) {
  Rng rng(3);
  Eigen::MatrixXd y(4225, static_cast<Eigen::Index>(state.range(0)));
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca(y, 1e-2));
}
BENCHMARK(BM_PcaGram)->Arg(30)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_SecondOrderTermMean(benchmark::State& state) {
  auto sim = std::make_shared<DiffusionSimulator>(DiffusionProblem{32, 3});
  const AnchorPoint anchor = AnchorPoint::mean_of(sim->inputs());
  for (auto _ : state) {
    SimCache cache(sim);
    benchmark::DoNotOptimize(term_mean(AnovaIndex{0, 4}, anchor, cache, 5));
  }
}
BENCHMARK(BM_SecondOrderTermMean)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
