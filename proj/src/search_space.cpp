#include "evosa/search_space.hpp"

#include <algorithm>
#include <map>

#include "evosa/error.hpp"
#include "evosa/random.hpp"

namespace evosa {

auto CandidateOperations(OperationCatalog const& catalog, PositionContext const& context) -> std::vector<std::string>
{
    return context.is_sink ? catalog.SinkNames() : catalog.Names();
}

auto RandomPipeline(OperationCatalog const& catalog, StructuralConstraints const& constraints, std::uint64_t seed) -> Pipeline
{
    constraints.Check();
    auto const sinks = catalog.SinkNames();
    if (sinks.empty()) {
        throw ConfigError("catalog has no sink-capable model");
    }
    auto const preprocessors = catalog.NamesOfKind(OperationKind::Preprocessor);
    auto const models = catalog.NamesOfKind(OperationKind::Model);

    Rng rng(seed);
    auto const target_size = 1 + rng.Index(constraints.max_nodes);

    std::vector<OperationNode> nodes;
    std::vector<Edge> edges;
    // distance to the sink in nodes (sink = 1) and in-degree per node
    std::vector<std::size_t> level;
    std::vector<std::size_t> indegree;

    auto const& sink_op = sinks[rng.Index(sinks.size())];
    nodes.push_back({ "n0", sink_op, catalog.Find(sink_op)->default_params });
    level.push_back(1);
    indegree.push_back(0);

    auto eligible = [&](std::size_t exclude) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (i != exclude && level[i] < constraints.max_depth && indegree[i] < constraints.max_parents_per_node) {
                out.push_back(i);
            }
        }
        return out;
    };

    for (std::size_t k = 1; k < target_size; ++k) {
        auto targets = eligible(nodes.size());
        if (targets.empty()) {
            break;
        }
        auto const target = targets[rng.Index(targets.size())];

        bool use_model = preprocessors.empty() || (!models.empty() && rng.Bernoulli(0.5));
        auto const& pool = use_model ? models : preprocessors;
        auto const& op = pool[rng.Index(pool.size())];

        auto const id = "n" + std::to_string(k);
        nodes.push_back({ id, op, catalog.Find(op)->default_params });
        edges.push_back({ id, nodes[target].id });
        ++indegree[target];
        level.push_back(level[target] + 1);
        indegree.push_back(0);

        // occasionally feed a second consumer to produce non-tree DAGs
        if (rng.Bernoulli(0.2)) {
            auto const self = nodes.size() - 1;
            auto others = eligible(target);
            std::erase(others, self);
            std::erase_if(others, [&](std::size_t i) { return level[i] + 1 > constraints.max_depth; });
            if (!others.empty()) {
                auto const other = others[rng.Index(others.size())];
                edges.push_back({ id, nodes[other].id });
                ++indegree[other];
                level[self] = std::max(level[self], level[other] + 1);
            }
        }
    }
    return Pipeline(std::move(nodes), std::move(edges));
}

} // namespace evosa
