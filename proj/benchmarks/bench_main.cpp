#include <benchmark/benchmark.h>

#include <random>

#include "projnod/bifurcation.hpp"
#include "projnod/dynamics.hpp"

using namespace projnod;

namespace {

NodParams params() {
  NodParams p;
  p.d = 0.3;
  p.u = 0.14;
  p.alpha = 1.0;
  p.gamma = 0.5;
  return p;
}

ConstraintSet constraints(int n) {
  Eigen::VectorXd p(3);
  p << 1, 1, 1;
  return ConstraintSet::homogeneous(n, p);
}

void BM_FullRhs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ConstraintSet c = constraints(n);
  const FullSystem sys(graphs::ring(n), c, params(), Eigen::MatrixXd::Zero(n, 3));
  const Eigen::MatrixXd z = seeded_initial_state(c, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sys.rhs(z));
}
BENCHMARK(BM_FullRhs)->Arg(10)->Arg(100)->Arg(500);

void BM_ReducedRhs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ReducedSystem sys(graphs::ring(n), constraints(n), params(), Eigen::VectorXd::Zero(n));
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(sys.rhs(y));
}
BENCHMARK(BM_ReducedRhs)->Arg(10)->Arg(100)->Arg(500);

void BM_IntegrateFull(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ConstraintSet c = constraints(n);
  const FullSystem sys(graphs::complete(n), c, params(), Eigen::MatrixXd::Zero(n, 3));
  IntegrationOptions opts;
  opts.horizon = 10;
  opts.sample_every = 100;
  const Eigen::MatrixXd z0 = seeded_initial_state(c, 1);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(sys, z0, opts));
}
BENCHMARK(BM_IntegrateFull)->Arg(6)->Arg(50);

void BM_DominantEigenpair(benchmark::State& state) {
  const Graph g = graphs::circulant(static_cast<int>(state.range(0)), {1, 2, 5});
  for (auto _ : state) benchmark::DoNotOptimize(dominant_eigenpair(g));
}
BENCHMARK(BM_DominantEigenpair)->Arg(20)->Arg(200);

// Above the dense limit the power-iteration path runs; a random graph keeps the spectral gap wide.
void BM_DominantEigenpairPower(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(5);
  std::bernoulli_distribution edge(0.05);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (edge(rng)) a(i, j) = a(j, i) = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(dominant_eigenpair(a));
}
BENCHMARK(BM_DominantEigenpairPower)->Arg(600)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_EquilibriumSweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Graph g = graphs::complete(n);
  const ConstraintSet c = constraints(n);
  const auto grid = linspace(0.05, 0.12, 31);
  for (auto _ : state)
    benchmark::DoNotOptimize(equilibrium_sweep(g, c, params(), Eigen::MatrixXd::Zero(n, 3), grid));
}
BENCHMARK(BM_EquilibriumSweep)->Arg(6)->Arg(20);

}  // namespace
BENCHMARK_MAIN();
