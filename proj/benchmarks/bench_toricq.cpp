#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <string>

#include "toricq/balance.hpp"

using namespace toricq;

namespace {

struct Env {
  std::unique_ptr<Setting> S;
  std::unique_ptr<ReferenceProducts> R;
};

Env& env(const std::string& name) {
  static std::map<std::string, Env> cache;
  auto& e = cache[name];
  if (!e.S) {
    e.S = std::make_unique<Setting>(load_polytope(std::string(TORICQ_CATALOG_DIR) + "/" + name + ".json"));
    e.R = std::make_unique<ReferenceProducts>(*e.S);
  }
  return e;
}

void BM_LatticePoints(benchmark::State& state) {
  const auto& P = env("dp1").S->polytope();
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lattice_points(P, k));
}
BENCHMARK(BM_LatticePoints)->RangeMultiplier(2)->Range(1, 64);

void BM_EvaluateFk(benchmark::State& state) {
  const auto& W = env("dp1").S->weights(static_cast<int>(state.range(0)));
  const Eigen::Vector2d xi(-0.5, -0.5);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_Fk(W, xi));
  state.SetItemsProcessed(state.iterations() * W.size());
}
BENCHMARK(BM_EvaluateFk)->RangeMultiplier(2)->Range(1, 64);

void BM_MinimizeFk(benchmark::State& state) {
  const auto& W = env("dp1").S->weights(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(minimize_Fk(W));
}
BENCHMARK(BM_MinimizeFk)->RangeMultiplier(2)->Range(1, 64);

void BM_HilbOnGrid(benchmark::State& state) {
  const auto& S = *env("dp1").S;
  const int k = static_cast<int>(state.range(0));
  const auto g = GWeight::make(minimize_Fk(S.weights(k)).V.xi, S.weights(k), S.dh());
  S.quad().grid(0);
  for (auto _ : state) benchmark::DoNotOptimize(hilb_on_grid(S, S.phi0(), HilbMeasure::own(), g, k, 0));
}
BENCHMARK(BM_HilbOnGrid)->RangeMultiplier(2)->Range(1, 16)->Unit(benchmark::kMillisecond);

void BM_BalanceStep(benchmark::State& state) {
  auto& e = env("dp1");
  const int k = static_cast<int>(state.range(0));
  const auto& W = e.S->weights(k);
  BalanceState init;
  init.level = k;
  init.g = GWeight::make(minimize_Fk(W).V.xi, W, e.S->dh());
  init.H = e.R->at(k);
  for (auto _ : state) {
    BalanceState s = init;
    step(s, *e.R, 1.0, 0);
    benchmark::DoNotOptimize(s.H);
  }
}
BENCHMARK(BM_BalanceStep)->RangeMultiplier(2)->Range(1, 16)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
