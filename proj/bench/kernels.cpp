// Serial reference vs OpenMP kernel for each parallel hot spot.
// Arg is the thread count for the parallel variants (0 = all hardware threads).
#include <benchmark/benchmark.h>

#include <vector>

#include "evosa/dataset.hpp"
#include "evosa/evaluator.hpp"
#include "evosa/forest.hpp"
#include "evosa/local_sa.hpp"
#include "evosa/models.hpp"
#include "evosa/search_space.hpp"

using namespace evosa;

namespace {

auto const& Catalog()
{
    static auto const catalog = DefaultCatalog();
    return catalog;
}

auto Population(std::size_t n) -> std::vector<Pipeline>
{
    std::vector<Pipeline> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(RandomPipeline(Catalog(), {}, i));
    }
    return out;
}

auto const& ToyEvaluator()
{
    static ToyMlEvaluator const eval(MakeLinearRegression(3, 400, 6, 0.2), {}, Catalog());
    return eval;
}

void BatchSerial(benchmark::State& state)
{
    auto const pipelines = Population(32);
    for (auto _ : state) {
        benchmark::DoNotOptimize(EvaluateBatchSerial(pipelines, ToyEvaluator()));
    }
}

void BatchParallel(benchmark::State& state)
{
    auto const pipelines = Population(32);
    for (auto _ : state) {
        benchmark::DoNotOptimize(EvaluateBatchParallel(pipelines, ToyEvaluator(), static_cast<int>(state.range(0))));
    }
}

void SweepSerial(benchmark::State& state)
{
    auto const p = RandomPipeline(Catalog(), {}, 17);
    for (auto _ : state) {
        benchmark::DoNotOptimize(FullSweepSerial(p, ToyEvaluator(), Catalog()));
    }
}

void SweepParallel(benchmark::State& state)
{
    auto const p = RandomPipeline(Catalog(), {}, 17);
    SweepOptions options;
    options.jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(FullSweep(p, ToyEvaluator(), Catalog(), options));
    }
}

struct KnnData {
    Dataset train = MakeLinearRegression(5, 2000, 8, 0.1);
    Dataset query = MakeLinearRegression(6, 500, 8, 0.1);
};

auto const& Knn()
{
    static KnnData const data;
    return data;
}

void KnnSerial(benchmark::State& state)
{
    auto const& d = Knn();
    for (auto _ : state) {
        benchmark::DoNotOptimize(KnnPredictSerial(d.train.Features(), d.train.Target(), d.query.Features(), 5, Task::Regression));
    }
}

void KnnParallel(benchmark::State& state)
{
    auto const& d = Knn();
    for (auto _ : state) {
        benchmark::DoNotOptimize(KnnPredictParallel(d.train.Features(), d.train.Target(), d.query.Features(), 5, Task::Regression,
            static_cast<int>(state.range(0))));
    }
}

void ForestSerial(benchmark::State& state)
{
    auto const& d = Knn();
    for (auto _ : state) {
        RegressionForest forest;
        forest.FitSerial(d.train.Features(), d.train.Target(), {});
        benchmark::DoNotOptimize(forest);
    }
}

void ForestParallel(benchmark::State& state)
{
    auto const& d = Knn();
    ForestOptions options;
    options.jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        RegressionForest forest;
        forest.Fit(d.train.Features(), d.train.Target(), options);
        benchmark::DoNotOptimize(forest);
    }
}

} // namespace

BENCHMARK(BatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BatchParallel)->Arg(2)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(SweepParallel)->Arg(2)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(KnnSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(KnnParallel)->Arg(2)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(ForestSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(ForestParallel)->Arg(2)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
