#include <benchmark/benchmark.h>

#include <memory>

#include "gwre/criteria.hpp"
#include "gwre/ldp.hpp"
#include "gwre/ray.hpp"
#include "gwre/walk.hpp"

using namespace gwre;

namespace {

void BM_HitProbExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CounterRng rng(7);
  RayWeights w;
  w.a.reserve(n);
  for (int i = 0; i < n; ++i) w.a.push_back(0.1 + 2.0 * rng.uniform());
  for (auto _ : state) benchmark::DoNotOptimize(hit_prob_exact(w));
}
BENCHMARK(BM_HitProbExact)->Arg(100)->Arg(1000)->Arg(10000);

void BM_WalkSteps(benchmark::State& state) {
  auto tree = std::make_shared<LazyTree>(OffspringLaw::deterministic(2), 11);
  WalkEnvironment env(tree, EnvKernel::iid({{1.0, 1.0}}));
  WalkState walk;
  CounterRng rng(13);
  for (auto _ : state) {
    walk_step(env, walk, rng);
    if (walk.position == kSentinel) walk = WalkState{};
  }
}
BENCHMARK(BM_WalkSteps);

void BM_PerronCgf(benchmark::State& state) {
  EnvKernel chain = log_transform(EnvKernel::finite(
      {{0.5, 0.0, 0}, {3.0, 0.0, 1}}, {{0.7, 0.3}, {0.2, 0.8}}));
  Cgf f = make_cgf(chain);
  double lam = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f(lam));
    lam = lam < 1.0 ? lam + 0.01 : 0.0;
  }
}
BENCHMARK(BM_PerronCgf);

void BM_ClassifyMarkov(benchmark::State& state) {
  EnvKernel chain = EnvKernel::finite({{0.1, 0.0, 0}, {0.8, 0.0, 1}},
                                      {{0.5, 0.5}, {0.5, 0.5}});
  for (auto _ : state)
    benchmark::DoNotOptimize(
        classify_markov(chain, 2.0, {{std::log(0.05), 0.0}}));
}
BENCHMARK(BM_ClassifyMarkov);

}  // namespace

BENCHMARK_MAIN();
