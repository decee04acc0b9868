#ifndef EVOSA_EVALUATOR_HPP
#define EVOSA_EVALUATOR_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "evosa/catalog.hpp"
#include "evosa/dataset.hpp"
#include "evosa/pipeline.hpp"

namespace evosa {

inline constexpr double kWorstQuality = -std::numeric_limits<double>::max();

// Quality is always maximized.
struct FitnessReport {
    double quality { kWorstQuality };
    std::size_t complexity { 0 };
    double train_seconds { 0.0 };
    double inference_seconds { 0.0 };
    bool valid { false };
    std::string reason;

    static auto Invalid(std::size_t complexity, std::string reason) -> FitnessReport
    {
        return { kWorstQuality, complexity, 0.0, 0.0, false, std::move(reason) };
    }

    // Equality ignoring the wall-clock timing fields.
    [[nodiscard]] auto SameOutcome(FitnessReport const& other) const -> bool
    {
        return quality == other.quality && complexity == other.complexity && valid == other.valid && reason == other.reason;
    }
};

// Evaluate must be deterministic for a given pipeline and reentrant.
class Evaluator {
public:
    Evaluator() = default;
    Evaluator(Evaluator const&) = delete;
    Evaluator(Evaluator&&) = delete;
    auto operator=(Evaluator const&) -> Evaluator& = delete;
    auto operator=(Evaluator&&) -> Evaluator& = delete;
    virtual ~Evaluator() = default;

    [[nodiscard]] virtual auto Evaluate(Pipeline const& pipeline) const -> FitnessReport = 0;
    [[nodiscard]] virtual auto Name() const -> std::string = 0;
};

// Linear landscape: quality = sum op_score + sum edge_bonus - lambda * nodes.
// op_score ~ U[0, 1] per operation and edge_bonus ~ U[-0.5, 0.5] per ordered
// operation pair, both drawn from the landscape seed in catalog order.
class SyntheticEvaluator final : public Evaluator {
public:
    static constexpr double kLambda = 0.05;

    SyntheticEvaluator(OperationCatalog catalog, std::uint64_t landscape_seed);

    [[nodiscard]] auto Evaluate(Pipeline const& pipeline) const -> FitnessReport override;
    [[nodiscard]] auto Name() const -> std::string override;

    [[nodiscard]] auto OpScore(std::string_view operation) const -> double;
    [[nodiscard]] auto EdgeBonus(std::string_view from, std::string_view to) const -> double;
    [[nodiscard]] auto Catalog() const -> OperationCatalog const& { return catalog_; }
    [[nodiscard]] auto Seed() const -> std::uint64_t { return seed_; }

private:
    OperationCatalog catalog_;
    std::uint64_t seed_;
    std::vector<double> op_score_;
    std::vector<double> edge_bonus_; // row-major |ops| x |ops|
};

struct SplitSpec {
    double train_fraction { 0.75 };
    std::uint64_t seed { 0 };
};

// Executes pipelines on a tabular dataset with a seeded holdout split.
// Sources see the raw features; a node with several parents sees their
// outputs concatenated column-wise in parent-id order. The sink's holdout
// predictions are scored with F1 (classification) or R^2 (regression).
class ToyMlEvaluator final : public Evaluator {
public:
    ToyMlEvaluator(Dataset dataset, SplitSpec split, OperationCatalog catalog, int inner_jobs = 1);

    [[nodiscard]] auto Evaluate(Pipeline const& pipeline) const -> FitnessReport override;
    [[nodiscard]] auto Name() const -> std::string override;

    [[nodiscard]] auto TrainRows() const -> std::vector<std::size_t> const& { return train_rows_; }
    [[nodiscard]] auto TestRows() const -> std::vector<std::size_t> const& { return test_rows_; }
    [[nodiscard]] auto GetDataset() const -> Dataset const& { return dataset_; }

    // Sink predictions on the holdout rows (throws on execution failure).
    [[nodiscard]] auto PredictHoldout(Pipeline const& pipeline) const -> std::vector<double>;
    // Number of columns the given node receives as input.
    [[nodiscard]] auto InputWidth(Pipeline const& pipeline, std::string_view node_id) const -> std::size_t;

private:
    struct Execution;
    [[nodiscard]] auto Execute(Pipeline const& pipeline) const -> Execution;

    Dataset dataset_;
    OperationCatalog catalog_;
    int inner_jobs_;
    std::vector<std::size_t> train_rows_;
    std::vector<std::size_t> test_rows_;
    Matrix train_x_;
    Matrix test_x_;
    std::vector<double> train_y_;
    std::vector<double> test_y_;
};

// Counts Evaluate calls on the wrapped evaluator.
class CountingEvaluator final : public Evaluator {
public:
    explicit CountingEvaluator(Evaluator const& inner) : inner_(inner) { }

    [[nodiscard]] auto Evaluate(Pipeline const& pipeline) const -> FitnessReport override
    {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.Evaluate(pipeline);
    }
    [[nodiscard]] auto Name() const -> std::string override { return inner_.Name(); }
    [[nodiscard]] auto Calls() const -> std::size_t { return calls_.load(std::memory_order_relaxed); }

private:
    Evaluator const& inner_;
    mutable std::atomic<std::size_t> calls_ { 0 };
};

// Memoizes reports by canonical pipeline document. Only valid for
// deterministic evaluators; timings of cached hits are those of the first call.
class CachingEvaluator final : public Evaluator {
public:
    explicit CachingEvaluator(Evaluator const& inner) : inner_(inner) { }

    [[nodiscard]] auto Evaluate(Pipeline const& pipeline) const -> FitnessReport override;
    [[nodiscard]] auto Name() const -> std::string override { return inner_.Name(); }
    [[nodiscard]] auto Hits() const -> std::size_t;
    [[nodiscard]] auto Misses() const -> std::size_t;

private:
    Evaluator const& inner_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, FitnessReport> cache_;
    mutable std::size_t hits_ { 0 };
    mutable std::size_t misses_ { 0 };
};

// Batch evaluation kernels. The serial loop is the reference; the parallel
// version distributes pipelines over OpenMP threads and returns reports in
// input order.
auto EvaluateBatchSerial(std::span<Pipeline const> pipelines, Evaluator const& evaluator) -> std::vector<FitnessReport>;
auto EvaluateBatchParallel(std::span<Pipeline const> pipelines, Evaluator const& evaluator, int jobs) -> std::vector<FitnessReport>;
auto EvaluateBatch(std::span<Pipeline const> pipelines, Evaluator const& evaluator, int jobs) -> std::vector<FitnessReport>;

} // namespace evosa

#endif
