#include "evosa/evaluator.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <memory>

#include "evosa/metrics.hpp"
#include "evosa/models.hpp"
#include "evosa/parallel.hpp"
#include "evosa/random.hpp"

namespace evosa {

SyntheticEvaluator::SyntheticEvaluator(OperationCatalog catalog, std::uint64_t landscape_seed)
    : catalog_(std::move(catalog))
    , seed_(landscape_seed)
{
    Rng rng(MixSeed(landscape_seed, 0x5EED));
    auto const n = catalog_.Size();
    op_score_.resize(n);
    for (auto& s : op_score_) {
        s = rng.Uniform(0.0, 1.0);
    }
    edge_bonus_.resize(n * n);
    for (auto& b : edge_bonus_) {
        b = rng.Uniform(-0.5, 0.5);
    }
}

auto SyntheticEvaluator::OpScore(std::string_view operation) const -> double
{
    auto i = catalog_.IndexOf(operation);
    if (!i) {
        throw ConstraintError("unknown operation '" + std::string(operation) + "'");
    }
    return op_score_[*i];
}

auto SyntheticEvaluator::EdgeBonus(std::string_view from, std::string_view to) const -> double
{
    auto i = catalog_.IndexOf(from);
    auto j = catalog_.IndexOf(to);
    if (!i || !j) {
        throw ConstraintError("unknown operation pair " + std::string(from) + "->" + std::string(to));
    }
    return edge_bonus_[*i * catalog_.Size() + *j];
}

auto SyntheticEvaluator::Evaluate(Pipeline const& pipeline) const -> FitnessReport
{
    auto const complexity = StructuralComplexity(pipeline);
    if (auto verdict = Validate(pipeline, catalog_); !verdict.Ok()) {
        return FitnessReport::Invalid(complexity, verdict.Describe());
    }
    double quality = 0.0;
    for (auto const& node : pipeline.Nodes()) {
        quality += OpScore(node.operation);
    }
    for (auto const& edge : pipeline.Edges()) {
        quality += EdgeBonus(pipeline.OperationOf(edge.source), pipeline.OperationOf(edge.target));
    }
    quality -= kLambda * static_cast<double>(complexity);
    return { quality, complexity, 0.0, 0.0, true, {} };
}

auto SyntheticEvaluator::Name() const -> std::string
{
    return "synthetic(" + std::to_string(seed_) + ")";
}

struct ToyMlEvaluator::Execution {
    std::map<std::string, Matrix> train_out;
    std::map<std::string, Matrix> test_out;
    std::map<std::string, std::size_t> input_width;
    std::string sink;
    double train_seconds { 0.0 };
    double inference_seconds { 0.0 };
};

ToyMlEvaluator::ToyMlEvaluator(Dataset dataset, SplitSpec split, OperationCatalog catalog, int inner_jobs)
    : dataset_(std::move(dataset))
    , catalog_(std::move(catalog))
    , inner_jobs_(inner_jobs)
{
    auto const n = dataset_.Rows();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    Rng rng(MixSeed(split.seed, 0x5917));
    rng.Shuffle(std::span(order));
    auto n_train = static_cast<std::size_t>(std::floor(split.train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    train_rows_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_rows_.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    train_x_ = dataset_.Features().SelectRows(train_rows_);
    test_x_ = dataset_.Features().SelectRows(test_rows_);
    for (auto r : train_rows_) {
        train_y_.push_back(dataset_.Target()[r]);
    }
    for (auto r : test_rows_) {
        test_y_.push_back(dataset_.Target()[r]);
    }
}

auto ToyMlEvaluator::Execute(Pipeline const& pipeline) const -> Execution
{
    using Clock = std::chrono::steady_clock;
    Execution run;
    auto const task = dataset_.GetTask();
    for (auto const& id : TopologicalOrder(pipeline)) {
        auto const& node = *pipeline.Find(id);
        auto step = MakeStep(node.operation, node.params, task, inner_jobs_);
        if (!step) {
            throw ConstraintError("unsupported operation '" + node.operation + "'");
        }
        auto const parents = pipeline.Parents(id);
        Matrix train_in;
        Matrix test_in;
        if (parents.empty()) {
            train_in = train_x_;
            test_in = test_x_;
        } else {
            std::vector<Matrix const*> train_blocks;
            std::vector<Matrix const*> test_blocks;
            for (auto const& p : parents) {
                train_blocks.push_back(&run.train_out.at(p));
                test_blocks.push_back(&run.test_out.at(p));
            }
            train_in = Matrix::HorizontalConcat(train_blocks);
            test_in = Matrix::HorizontalConcat(test_blocks);
        }
        run.input_width[id] = train_in.Cols();

        auto const t0 = Clock::now();
        step->Fit(train_in, train_y_);
        auto train_out = step->Apply(train_in);
        auto const t1 = Clock::now();
        auto test_out = step->Apply(test_in);
        auto const t2 = Clock::now();
        run.train_seconds += std::chrono::duration<double>(t1 - t0).count();
        run.inference_seconds += std::chrono::duration<double>(t2 - t1).count();

        for (auto const* m : { &train_out, &test_out }) {
            for (double v : m->Data()) {
                if (!std::isfinite(v)) {
                    throw NumericalError("non-finite output from '" + node.operation + "'");
                }
            }
        }
        run.train_out[id] = std::move(train_out);
        run.test_out[id] = std::move(test_out);
    }
    run.sink = pipeline.Sinks().front();
    return run;
}

auto ToyMlEvaluator::PredictHoldout(Pipeline const& pipeline) const -> std::vector<double>
{
    auto run = Execute(pipeline);
    return run.test_out.at(run.sink).Column(0);
}

auto ToyMlEvaluator::InputWidth(Pipeline const& pipeline, std::string_view node_id) const -> std::size_t
{
    auto run = Execute(pipeline);
    return run.input_width.at(std::string(node_id));
}

auto ToyMlEvaluator::Evaluate(Pipeline const& pipeline) const -> FitnessReport
{
    auto const complexity = StructuralComplexity(pipeline);
    if (auto verdict = Validate(pipeline, catalog_); !verdict.Ok()) {
        return FitnessReport::Invalid(complexity, verdict.Describe());
    }
    try {
        auto run = Execute(pipeline);
        auto const predictions = run.test_out.at(run.sink).Column(0);
        double quality = 0.0;
        if (dataset_.GetTask() == Task::Classification) {
            quality = MetricF1(predictions, test_y_);
        } else {
            auto r2 = MetricR2(predictions, test_y_);
            if (!r2) {
                return FitnessReport::Invalid(complexity, "holdout targets have zero variance");
            }
            quality = *r2;
        }
        return { quality, complexity, run.train_seconds, run.inference_seconds, true, {} };
    } catch (Error const& e) {
        return FitnessReport::Invalid(complexity, e.what());
    }
}

auto ToyMlEvaluator::Name() const -> std::string
{
    return "toy_ml(" + dataset_.Name() + ")";
}

auto CachingEvaluator::Evaluate(Pipeline const& pipeline) const -> FitnessReport
{
    auto key = Serialize(pipeline);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) {
            ++hits_;
            return it->second;
        }
    }
    auto report = inner_.Evaluate(pipeline);
    std::lock_guard lock(mutex_);
    ++misses_;
    cache_.try_emplace(std::move(key), report);
    return report;
}

auto CachingEvaluator::Hits() const -> std::size_t
{
    std::lock_guard lock(mutex_);
    return hits_;
}

auto CachingEvaluator::Misses() const -> std::size_t
{
    std::lock_guard lock(mutex_);
    return misses_;
}

auto EvaluateBatchSerial(std::span<Pipeline const> pipelines, Evaluator const& evaluator) -> std::vector<FitnessReport>
{
    std::vector<FitnessReport> reports;
    reports.reserve(pipelines.size());
    for (auto const& p : pipelines) {
        reports.push_back(evaluator.Evaluate(p));
    }
    return reports;
}

auto EvaluateBatchParallel(std::span<Pipeline const> pipelines, Evaluator const& evaluator, int jobs) -> std::vector<FitnessReport>
{
    std::vector<FitnessReport> reports(pipelines.size());
    ParallelFor(pipelines.size(), jobs, [&](std::size_t i) {
        reports[i] = evaluator.Evaluate(pipelines[i]);
    });
    return reports;
}

auto EvaluateBatch(std::span<Pipeline const> pipelines, Evaluator const& evaluator, int jobs) -> std::vector<FitnessReport>
{
    return jobs == 1 ? EvaluateBatchSerial(pipelines, evaluator) : EvaluateBatchParallel(pipelines, evaluator, jobs);
}

} // namespace evosa
