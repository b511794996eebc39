#include <benchmark/benchmark.h>

#include "swirl/characteristics.hpp"
#include "swirl/experiments.hpp"
#include "swirl/fit.hpp"
#include "swirl/retrieval.hpp"

using namespace swirl;

namespace {

const SeparableVortex kModel{ModelParams{}};

Domain with_h(double h) {
  Domain d;
  d.h = h;
  return d;
}

void BM_TraceToMoh(benchmark::State& state) {
  const Domain d = with_h(3.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trace_rk(kModel, d, {0.5, 0.3}, +1, TraceOptions{}));
  }
}
BENCHMARK(BM_TraceToMoh);

void BM_Classify(benchmark::State& state) {
  const Domain d = with_h(3.5);
  const Grid g{};
  for (auto _ : state) benchmark::DoNotOptimize(classify(kModel, d, g));
}
BENCHMARK(BM_Classify)->Unit(benchmark::kMillisecond);

void BM_Retrieve(benchmark::State& state) {
  const Domain d = with_h(2.5);
  const TwinTruth t(kModel, d, TruthProfile{});
  const Grid g{};
  const VoidMap map = classify(kModel, d, g);
  const MohBoundary b = build_moh_boundary(kModel, d, t.u_at(d.h), 20000);
  for (auto _ : state) benchmark::DoNotOptimize(differentiate(retrieve(kModel, d, b, map)));
}
BENCHMARK(BM_Retrieve)->Unit(benchmark::kMillisecond);

void BM_FitObjective(benchmark::State& state) {
  const TwinTruth t(kModel, Domain{}, TruthProfile{});
  const auto obs = make_pseudo_obs(t, Grid{41, 61, 4.0, 6.0}, 2.5, 0.1, 1);
  const ModelParams p{1.1, 3.8, 0.9, 4.2, 2.1};
  for (auto _ : state) benchmark::DoNotOptimize(fit_objective(p, obs));
}
BENCHMARK(BM_FitObjective);

void BM_Fit(benchmark::State& state) {
  const TwinTruth t(kModel, Domain{}, TruthProfile{});
  const auto obs = make_pseudo_obs(t, Grid{41, 61, 4.0, 6.0}, 2.5, 0.1, 1);
  const auto bounds = ParameterBounds::defaults(obs, 4.0, 6.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_model(obs, ModelParams{1.2, 3.2, 1.2, 3.2, 2.4}, bounds));
  }
}
BENCHMARK(BM_Fit)->Unit(benchmark::kMillisecond);

void BM_Twin(benchmark::State& state) {
  const TwinTruth t(kModel, Domain{}, TruthProfile{});
  TwinSettings s;
  s.sigma = 0.1;
  s.diagnostics = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_twin(t, s));
}
BENCHMARK(BM_Twin)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
