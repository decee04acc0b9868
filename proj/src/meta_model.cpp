#include "evosa/meta_model.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "evosa/error.hpp"

namespace evosa {

EdgeVocabulary::EdgeVocabulary(std::vector<OperationPair> pairs)
    : pairs_(std::move(pairs))
{
    std::ranges::sort(pairs_);
    auto [first, last] = std::ranges::unique(pairs_);
    pairs_.erase(first, last);
}

auto EdgeVocabulary::IndexOf(OperationPair const& pair) const -> std::optional<std::size_t>
{
    auto it = std::ranges::lower_bound(pairs_, pair);
    if (it == pairs_.end() || *it != pair) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - pairs_.begin());
}

auto BuildVocabulary(std::span<HistoryRecord const> history) -> EdgeVocabulary
{
    std::set<OperationPair> pairs;
    for (auto const& r : history) {
        for (auto const& e : r.pipeline.Edges()) {
            pairs.emplace(r.pipeline.OperationOf(e.source), r.pipeline.OperationOf(e.target));
        }
    }
    return EdgeVocabulary({ pairs.begin(), pairs.end() });
}

auto EncodeGraph(Pipeline const& pipeline, EdgeVocabulary const& vocabulary) -> EncodedGraph
{
    EncodedGraph encoded { std::vector<double>(vocabulary.Width(), 0.0) };
    for (auto const& e : pipeline.Edges()) {
        auto column = vocabulary.IndexOf({ pipeline.OperationOf(e.source), pipeline.OperationOf(e.target) });
        encoded.counts[column.value_or(vocabulary.OverflowColumn())] += 1.0;
    }
    return encoded;
}

MetaModel::MetaModel(EdgeVocabulary vocabulary, RegressionForest forest, std::size_t records, std::size_t datasets)
    : vocabulary_(std::move(vocabulary))
    , forest_(std::move(forest))
    , records_(records)
    , datasets_(datasets)
{
}

auto MetaModel::Predict(Pipeline const& pipeline) const -> double
{
    return Predict(EncodeGraph(pipeline, vocabulary_));
}

auto MetaModel::Predict(EncodedGraph const& encoded) const -> double
{
    if (encoded.counts.size() != vocabulary_.Width()) {
        throw TrainingError(fmt::format("encoding has {} columns, model expects {}", encoded.counts.size(), vocabulary_.Width()));
    }
    return std::clamp(forest_.Predict(encoded.counts), 0.0, 1.0);
}

auto FitMetaModel(std::span<HistoryRecord const> history, ForestOptions const& options) -> MetaModel
{
    if (history.size() < kMinMetaTrainingRecords) {
        throw TrainingError(fmt::format("meta-model needs at least {} history records, got {}", kMinMetaTrainingRecords, history.size()));
    }
    auto vocabulary = BuildVocabulary(history);
    Matrix x(history.size(), vocabulary.Width());
    for (std::size_t r = 0; r < history.size(); ++r) {
        auto encoded = EncodeGraph(history[r].pipeline, vocabulary);
        for (std::size_t c = 0; c < encoded.counts.size(); ++c) {
            x(r, c) = encoded.counts[c];
        }
    }
    auto const y = NormalizedRanksByDataset(history);
    RegressionForest forest;
    forest.Fit(x, y, options);
    return { std::move(vocabulary), std::move(forest), history.size(), DatasetIds(history).size() };
}

auto SelectAmongTop(std::span<double const> scores, Rng& rng, std::size_t top) -> std::size_t
{
    if (scores.empty()) {
        throw ConfigError("metamodel selection needs at least one candidate");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    rng.Shuffle(std::span(order));
    std::ranges::stable_sort(order, [&](auto a, auto b) { return scores[a] > scores[b]; });
    auto const pool = std::min(std::max<std::size_t>(top, 1), order.size());
    return order[rng.Index(pool)];
}

auto MetaModelAdvisor::ChooseOperation(MutationSite const& /*site*/, std::vector<std::string> const& candidates,
    PlacementBuilder const& build, Rng& rng) const -> std::string
{
    std::vector<std::string> usable;
    std::vector<double> scores;
    for (auto const& c : candidates) {
        if (restrict_to_ && std::ranges::find(*restrict_to_, c) == restrict_to_->end()) {
            continue;
        }
        if (auto graph = build(c)) {
            usable.push_back(c);
            scores.push_back(model_->Predict(*graph));
        }
    }
    if (usable.empty()) {
        // nothing buildable; the caller's build will reject this and retry
        return candidates[rng.Index(candidates.size())];
    }
    return usable[SelectAmongTop(scores, rng)];
}

auto MetamodelMutation(Pipeline const& pipeline, std::vector<std::string> const& candidates, MetaModel const& model,
    OperationCatalog const& catalog, StructuralConstraints const& constraints, Rng& rng) -> Pipeline
{
    if (candidates.empty()) {
        throw ConfigError("metamodel mutation needs at least one candidate");
    }
    MetaModelAdvisor advisor(model, candidates);
    for (int attempt = 0; attempt < kMutationAttempts; ++attempt) {
        auto result = rng.Bernoulli(0.5) ? TryNodeChange(pipeline, catalog, constraints, rng, &advisor)
                                         : TryNodeAdd(pipeline, catalog, constraints, rng, &advisor);
        if (result) {
            return *result;
        }
    }
    return pipeline;
}

} // namespace evosa
