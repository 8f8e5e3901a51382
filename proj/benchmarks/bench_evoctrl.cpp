// wall-clock baselines for the expensive stages; run with
//   ./benchmarks/evoctrl_bench --benchmark_min_time=0.2s

#include "evoctrl/harness.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace evoctrl;

ProblemParams bench_params(int n_space, double p) {
  ProblemParams pp;
  pp.n_space = n_space;
  pp.n_time = 200;
  pp.p = p;
  return pp;
}

void BM_ProblemBuild(benchmark::State& state) {
  const DiffusionConfig dc =
      materialize(bench_params(static_cast<int>(state.range(0)), 2.0));
  for (auto _ : state) {
    BuiltProblem built = build_problem(dc);
    benchmark::DoNotOptimize(built);
  }
}
BENCHMARK(BM_ProblemBuild)->Arg(51)->Arg(101);

void BM_GramianAssembly(benchmark::State& state) {
  const BuiltProblem built =
      build_problem(materialize(bench_params(static_cast<int>(state.range(0)), 2.0)));
  for (auto _ : state) {
    GramianOperator G =
        assemble_gramian(built.evolution, built.problem.base.input);
    benchmark::DoNotOptimize(G);
  }
}
BENCHMARK(BM_GramianAssembly)->Arg(51)->Arg(101);

void BM_Resolvent(benchmark::State& state) {
  const double p = state.range(0) == 2 ? 2.0 : 4.0;
  const BuiltProblem built = build_problem(materialize(bench_params(101, p)));
  const GramianOperator G =
      assemble_gramian(built.evolution, built.problem.base.input);
  const StateVector h = target_defect(built.problem.base, built.evolution);
  ResolventConfig rc;
  rc.lambda = 1e-2;
  for (auto _ : state) {
    ResolventSolution z = solve_resolvent(G, built.problem.base.cfg, rc, h);
    benchmark::DoNotOptimize(z);
  }
}
BENCHMARK(BM_Resolvent)->Arg(2)->Arg(4);

void BM_LinearSynthesis(benchmark::State& state) {
  const BuiltProblem built = build_problem(materialize(bench_params(101, 2.0)));
  const GramianOperator G =
      assemble_gramian(built.evolution, built.problem.base.input);
  ResolventConfig rc;
  rc.lambda = 1e-2;
  for (auto _ : state) {
    FeedbackSynthesis fs =
        feedback_control(built.problem.base, built.evolution, G, rc);
    benchmark::DoNotOptimize(fs);
  }
}
BENCHMARK(BM_LinearSynthesis);

void BM_SemilinearSolve(benchmark::State& state) {
  const BuiltProblem built = build_problem(materialize(bench_params(101, 2.0)));
  const GramianOperator G =
      assemble_gramian(built.evolution, built.problem.base.input);
  ResolventConfig rc;
  rc.lambda = 1e-2;
  const FixedPointConfig fp;
  for (auto _ : state) {
    FixedPointSolution sol =
        fixed_point_solve(built.problem, built.evolution, G, rc, fp);
    benchmark::DoNotOptimize(sol);
  }
}
BENCHMARK(BM_SemilinearSolve);

}  // namespace

BENCHMARK_MAIN();
