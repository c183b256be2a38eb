#include <benchmark/benchmark.h>

#include "qae/queue_dynamics.hpp"
#include "qae/simulator.hpp"
#include "qae/solver.hpp"

namespace {

qae::ModelParams make(int n, double beta) {
  qae::ModelParams p;
  p.mu = 20;
  p.alpha = 0.1;
  p.beta = beta;
  p.gamma = 1.0 / n;
  p.population = qae::FixedOthers{n};
  return p;
}

void BM_AdvanceStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  qae::StateDistribution s = qae::arrivals_only_state(n, 0.3);
  qae::StepWorkspace ws;
  for (auto _ : state) {
    qae::advance(s, 1e-4, 20.0, 1e-4, ws);
    benchmark::DoNotOptimize(s.probabilities().data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_AdvanceStep)->Arg(2)->Arg(9)->Arg(30);

void BM_SolvePinned(benchmark::State& state) {
  const qae::ModelParams p = make(static_cast<int>(state.range(0)), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(qae::solve_equilibrium(p).c_e);
}
BENCHMARK(BM_SolvePinned)->Arg(2)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_SolveTardiness(benchmark::State& state) {
  const qae::ModelParams p = make(static_cast<int>(state.range(0)), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(qae::solve_equilibrium(p).c_e);
}
BENCHMARK(BM_SolveTardiness)->Arg(2)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_SimulateProbe(benchmark::State& state) {
  const qae::ModelParams p = make(static_cast<int>(state.range(0)), 0.0);
  const qae::EquilibriumSolution s = qae::solve_equilibrium(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qae::estimate_cost(0.1, s.distribution, p, 100000, 42).mean);
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_SimulateProbe)->Arg(2)->Arg(9)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
