#include <benchmark/benchmark.h>

#include "bagoft/formula.hpp"
#include "bagoft/glm.hpp"
#include "bagoft/gof.hpp"
#include "bagoft/partition.hpp"
#include "bagoft/sim.hpp"

using namespace bagoft;

namespace {

sim::Generated sample(std::size_t n) {
  RandomSource rng(1);
  return sim::generate(sim::setting1(n, 0.651), rng);
}

void BM_FitLogistic(benchmark::State& state) {
  const auto g = sample(static_cast<std::size_t>(state.range(0)));
  const auto design = Formula::parse("x1 + x2 + x3").design(g.data);
  for (auto _ : state) benchmark::DoNotOptimize(glm::fit_logistic(design, g.data.response()));
}
BENCHMARK(BM_FitLogistic)->Arg(500)->Arg(1000)->Arg(10000);

void BM_GreedyPartition(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = sample(n);
  const auto fit = glm::fit_logistic(Formula::parse("x1 + x2").design(g.data), g.data.response());
  const auto phat = glm::predict_prob(fit.coefficients, Formula::parse("x1 + x2").design(g.data).x);
  partition::PartitionConfig c;
  c.n_min = n / 10;
  c.continuous = {"x1", "x2", "x3"};
  for (auto _ : state) benchmark::DoNotOptimize(partition::greedy_partition(c, g.data, phat));
}
BENCHMARK(BM_GreedyPartition)->Arg(500)->Arg(1000);

void BM_SingleSplitTest(benchmark::State& state) {
  const auto g = sample(static_cast<std::size_t>(state.range(0)));
  const auto formula = Formula::parse("x1 + x2");
  for (auto _ : state) {
    benchmark::DoNotOptimize(gof::single_split_test(g.data, formula, gof::TestConfig{}, RandomSource(2)));
  }
}
BENCHMARK(BM_SingleSplitTest)->Arg(500)->Arg(1000);

void BM_MultiSplitTest(benchmark::State& state) {
  const auto g = sample(1000);
  const auto formula = Formula::parse("x1 + x2");
  gof::TestConfig c;
  c.splits = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gof::multi_split_test(g.data, formula, c, RandomSource(3)));
}
BENCHMARK(BM_MultiSplitTest)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
