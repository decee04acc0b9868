#ifndef EVOSA_META_MODEL_HPP
#define EVOSA_META_MODEL_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evosa/catalog.hpp"
#include "evosa/forest.hpp"
#include "evosa/history.hpp"
#include "evosa/pipeline.hpp"
#include "evosa/random.hpp"
#include "evosa/suitability.hpp"
#include "evosa/variation.hpp"

namespace evosa {

// Sorted (from_op, to_op) pairs; column i of an encoding counts pair i and
// the last column counts pairs outside the vocabulary.
class EdgeVocabulary {
public:
    EdgeVocabulary() = default;
    explicit EdgeVocabulary(std::vector<OperationPair> pairs);

    [[nodiscard]] auto Pairs() const -> std::vector<OperationPair> const& { return pairs_; }
    [[nodiscard]] auto IndexOf(OperationPair const& pair) const -> std::optional<std::size_t>;
    [[nodiscard]] auto Width() const -> std::size_t { return pairs_.size() + 1; }
    [[nodiscard]] auto OverflowColumn() const -> std::size_t { return pairs_.size(); }

    friend auto operator==(EdgeVocabulary const&, EdgeVocabulary const&) -> bool = default;

private:
    std::vector<OperationPair> pairs_;
};

auto BuildVocabulary(std::span<HistoryRecord const> history) -> EdgeVocabulary;

struct EncodedGraph {
    std::vector<double> counts; // width = vocabulary.Width()

    friend auto operator==(EncodedGraph const&, EncodedGraph const&) -> bool = default;
};

auto EncodeGraph(Pipeline const& pipeline, EdgeVocabulary const& vocabulary) -> EncodedGraph;

inline constexpr std::size_t kMinMetaTrainingRecords = 20;
inline constexpr std::size_t kMetaTopCandidates = 5;

// Predicts the normalized rank of a pipeline from its edge counts.
class MetaModel {
public:
    MetaModel(EdgeVocabulary vocabulary, RegressionForest forest, std::size_t records, std::size_t datasets);

    [[nodiscard]] auto Predict(Pipeline const& pipeline) const -> double; // clamped to [0, 1]
    [[nodiscard]] auto Predict(EncodedGraph const& encoded) const -> double;

    [[nodiscard]] auto Vocabulary() const -> EdgeVocabulary const& { return vocabulary_; }
    [[nodiscard]] auto Forest() const -> RegressionForest const& { return forest_; }
    [[nodiscard]] auto TrainingRecords() const -> std::size_t { return records_; }
    [[nodiscard]] auto TrainingDatasets() const -> std::size_t { return datasets_; }

private:
    EdgeVocabulary vocabulary_;
    RegressionForest forest_;
    std::size_t records_;
    std::size_t datasets_;
};

// Targets are per-dataset normalized ranks. Throws TrainingError with fewer
// than kMinMetaTrainingRecords records.
auto FitMetaModel(std::span<HistoryRecord const> history, ForestOptions const& options = {}) -> MetaModel;

// Index drawn uniformly from the kMetaTopCandidates highest scores. Ties at
// the cut are broken at random.
auto SelectAmongTop(std::span<double const> scores, Rng& rng, std::size_t top = kMetaTopCandidates) -> std::size_t;

// Scores each candidate's placement by predicted rank and picks among the top.
class MetaModelAdvisor final : public MutationAdvisor {
public:
    explicit MetaModelAdvisor(MetaModel const& model, std::optional<std::vector<std::string>> restrict_to = std::nullopt)
        : model_(&model)
        , restrict_to_(std::move(restrict_to))
    {
    }

    [[nodiscard]] auto ChooseOperation(MutationSite const& site, std::vector<std::string> const& candidates,
        PlacementBuilder const& build, Rng& rng) const -> std::string override;

private:
    MetaModel const* model_;
    std::optional<std::vector<std::string>> restrict_to_;
};

// One node change or node add (equal odds) whose operation is picked among
// `candidates` by the meta-model; retried, then identity.
auto MetamodelMutation(Pipeline const& pipeline, std::vector<std::string> const& candidates, MetaModel const& model,
    OperationCatalog const& catalog, StructuralConstraints const& constraints, Rng& rng) -> Pipeline;

} // namespace evosa

#endif
