#include "evosa/sampling.hpp"

#include <algorithm>

#include "evosa/error.hpp"
#include "evosa/search_space.hpp"

namespace evosa {

auto ToString(HistoryDesign design) -> std::string_view
{
    return design == HistoryDesign::Uniform ? "uniform" : "balanced";
}

auto ParseHistoryDesign(std::string_view text) -> std::optional<HistoryDesign>
{
    if (text == "uniform") {
        return HistoryDesign::Uniform;
    }
    if (text == "balanced") {
        return HistoryDesign::Balanced;
    }
    return std::nullopt;
}

auto BalancedPipeline(OperationCatalog const& catalog, Rng& rng) -> Pipeline
{
    auto sinks = catalog.SinkNames();
    if (sinks.empty()) {
        throw ConfigError("catalog has no sink-capable operation");
    }
    auto const sink = sinks[rng.Index(sinks.size())];
    auto ops = catalog.Names();
    std::erase(ops, sink);
    rng.Shuffle(std::span(ops));
    ops.push_back(sink);

    std::vector<OperationNode> nodes;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        auto const* spec = catalog.Find(ops[i]);
        nodes.push_back({ "n" + std::to_string(i), ops[i], spec->default_params });
    }
    std::vector<Edge> edges;
    auto const n = ops.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        auto const later = n - i - 1;
        auto const first = i + 1 + rng.Index(later);
        edges.push_back({ nodes[i].id, nodes[first].id });
        if (later > 1 && rng.Bernoulli(0.5)) {
            auto second = i + 1 + rng.Index(later - 1);
            if (second >= first) {
                ++second;
            }
            edges.push_back({ nodes[i].id, nodes[second].id });
        }
    }
    return { std::move(nodes), std::move(edges) };
}

auto SampleHistory(Evaluator const& evaluator, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    std::size_t count, std::uint64_t seed, HistoryDesign design, std::string const& run_id, std::string const& dataset_id)
    -> std::vector<HistoryRecord>
{
    Rng rng(MixSeed(seed, 0x415));
    std::vector<HistoryRecord> records;
    for (std::size_t i = 0; i < count; ++i) {
        auto pipeline = design == HistoryDesign::Balanced ? BalancedPipeline(catalog, rng) : RandomPipeline(catalog, constraints, rng.Fork());
        auto report = evaluator.Evaluate(pipeline);
        if (report.valid) {
            records.push_back({ run_id, dataset_id, std::move(pipeline), report.quality, {} });
        }
    }
    return records;
}

} // namespace evosa
