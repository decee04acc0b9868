#include "evosa/variation.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "evosa/error.hpp"
#include "evosa/search_space.hpp"

namespace evosa {

auto ToString(MutationOperator op) -> std::string_view
{
    switch (op) {
    case MutationOperator::NodeChange: return "node_change";
    case MutationOperator::NodeAdd: return "node_add";
    case MutationOperator::NodeDelete: return "node_delete";
    case MutationOperator::EdgeAdd: return "edge_add";
    case MutationOperator::EdgeDelete: return "edge_delete";
    }
    return "unknown";
}

auto ParseMutationOperator(std::string_view text) -> std::optional<MutationOperator>
{
    for (auto op : { MutationOperator::NodeChange, MutationOperator::NodeAdd, MutationOperator::NodeDelete,
             MutationOperator::EdgeAdd, MutationOperator::EdgeDelete }) {
        if (ToString(op) == text) {
            return op;
        }
    }
    return std::nullopt;
}

auto UniformMutationWeights() -> MutationWeights
{
    return {
        { MutationOperator::NodeChange, 1.0 },
        { MutationOperator::NodeAdd, 1.0 },
        { MutationOperator::NodeDelete, 1.0 },
        { MutationOperator::EdgeAdd, 1.0 },
        { MutationOperator::EdgeDelete, 1.0 },
    };
}

namespace {

    auto Accept(Pipeline candidate, OperationCatalog const& catalog, StructuralConstraints const& constraints) -> std::optional<Pipeline>
    {
        if (!Validate(candidate, catalog).Ok() || !SatisfiesConstraints(candidate, constraints)) {
            return std::nullopt;
        }
        return candidate;
    }

    auto KindsOf(std::vector<std::string> const& ops, OperationCatalog const& catalog) -> std::vector<OperationKind>
    {
        std::vector<OperationKind> kinds;
        for (auto const& op : ops) {
            if (auto const* spec = catalog.Find(op)) {
                kinds.push_back(spec->kind);
            }
        }
        return kinds;
    }

    auto OpsOf(Pipeline const& pipeline, std::vector<std::string> const& ids) -> std::vector<std::string>
    {
        std::vector<std::string> ops;
        ops.reserve(ids.size());
        for (auto const& id : ids) {
            ops.push_back(pipeline.OperationOf(id));
        }
        return ops;
    }

    auto Candidates(MutationSite const& site, OperationCatalog const& catalog) -> std::vector<std::string>
    {
        return CandidateOperations(catalog, { KindsOf(site.parent_ops, catalog), KindsOf(site.child_ops, catalog), site.is_sink });
    }

    auto Choose(MutationSite const& site, std::vector<std::string> const& candidates, PlacementBuilder const& build,
        Rng& rng, MutationAdvisor const* advisor) -> std::optional<Pipeline>
    {
        if (candidates.empty()) {
            return std::nullopt;
        }
        auto const op = advisor != nullptr ? advisor->ChooseOperation(site, candidates, build, rng)
                                           : candidates[rng.Index(candidates.size())];
        return build(op);
    }

    auto NewNode(std::string id, std::string const& op, OperationCatalog const& catalog) -> OperationNode
    {
        auto const* spec = catalog.Find(op);
        return { std::move(id), op, spec != nullptr ? spec->default_params : Params {} };
    }

} // namespace

auto TryNodeChange(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    Rng& rng, MutationAdvisor const* advisor) -> std::optional<Pipeline>
{
    if (pipeline.Empty()) {
        return std::nullopt;
    }
    auto const& node = pipeline.Nodes()[rng.Index(pipeline.Size())];
    MutationSite site {
        OpsOf(pipeline, pipeline.Parents(node.id)),
        OpsOf(pipeline, pipeline.Children(node.id)),
        pipeline.Children(node.id).empty(),
    };
    auto candidates = Candidates(site, catalog);
    std::erase(candidates, node.operation);
    PlacementBuilder build = [&](std::string const& op) -> std::optional<Pipeline> {
        if (op == node.operation) {
            return std::nullopt;
        }
        try {
            return Accept(ReplaceNode(pipeline, node.id, op, catalog), catalog, constraints);
        } catch (Error const&) {
            return std::nullopt;
        }
    };
    return Choose(site, candidates, build, rng, advisor);
}

auto TryNodeAdd(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    Rng& rng, MutationAdvisor const* advisor, std::optional<InsertionPlace> place) -> std::optional<Pipeline>
{
    if (pipeline.Empty() || pipeline.Size() >= constraints.max_nodes) {
        return std::nullopt;
    }
    if (!place) {
        place = static_cast<InsertionPlace>(rng.Index(3));
    }
    auto const id = pipeline.FreshId();
    MutationSite site;
    std::vector<Edge> remove;
    std::vector<Edge> add;

    switch (*place) {
    case InsertionPlace::Parent: {
        std::vector<std::string> eligible;
        for (auto const& n : pipeline.Nodes()) {
            if (pipeline.Parents(n.id).size() < constraints.max_parents_per_node) {
                eligible.push_back(n.id);
            }
        }
        if (eligible.empty()) {
            return std::nullopt;
        }
        auto const& target = eligible[rng.Index(eligible.size())];
        site.child_ops = { pipeline.OperationOf(target) };
        add.push_back({ id, target });
        break;
    }
    case InsertionPlace::Child: {
        auto const& source = pipeline.Nodes()[rng.Index(pipeline.Size())].id;
        site.parent_ops = { pipeline.OperationOf(source) };
        add.push_back({ source, id });
        auto const children = pipeline.Children(source);
        if (children.empty()) {
            site.is_sink = true;
        } else {
            auto const& child = children[rng.Index(children.size())];
            site.child_ops = { pipeline.OperationOf(child) };
            add.push_back({ id, child });
        }
        break;
    }
    case InsertionPlace::Intermediate: {
        if (pipeline.Edges().empty()) {
            return std::nullopt;
        }
        auto const edge = pipeline.Edges()[rng.Index(pipeline.Edges().size())];
        site.parent_ops = { pipeline.OperationOf(edge.source) };
        site.child_ops = { pipeline.OperationOf(edge.target) };
        remove.push_back(edge);
        add.push_back({ edge.source, id });
        add.push_back({ id, edge.target });
        break;
    }
    }

    PlacementBuilder build = [&](std::string const& op) -> std::optional<Pipeline> {
        if (!catalog.Contains(op)) {
            return std::nullopt;
        }
        auto nodes = pipeline.Nodes();
        nodes.push_back(NewNode(id, op, catalog));
        std::vector<Edge> edges;
        for (auto const& e : pipeline.Edges()) {
            if (std::ranges::find(remove, e) == remove.end()) {
                edges.push_back(e);
            }
        }
        edges.insert(edges.end(), add.begin(), add.end());
        return Accept(Pipeline(std::move(nodes), std::move(edges)), catalog, constraints);
    };
    return Choose(site, Candidates(site, catalog), build, rng, advisor);
}

auto TryNodeDelete(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints, Rng& rng) -> std::optional<Pipeline>
{
    if (pipeline.Size() <= 1) {
        return std::nullopt;
    }
    auto const& node = pipeline.Nodes()[rng.Index(pipeline.Size())];
    try {
        return Accept(DeleteNode(pipeline, node.id, catalog), catalog, constraints);
    } catch (Error const&) {
        return std::nullopt;
    }
}

auto TryEdgeAdd(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints, Rng& rng) -> std::optional<Pipeline>
{
    std::vector<Pipeline> feasible;
    for (auto const& u : pipeline.Nodes()) {
        for (auto const& v : pipeline.Nodes()) {
            Edge edge { u.id, v.id };
            if (u.id == v.id || pipeline.HasEdge(edge)) {
                continue;
            }
            try {
                if (auto p = Accept(AddEdge(pipeline, edge, catalog), catalog, constraints)) {
                    feasible.push_back(std::move(*p));
                }
            } catch (Error const&) {
            }
        }
    }
    if (feasible.empty()) {
        return std::nullopt;
    }
    return std::move(feasible[rng.Index(feasible.size())]);
}

auto TryEdgeDelete(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints, Rng& rng) -> std::optional<Pipeline>
{
    std::vector<Pipeline> feasible;
    for (auto const& edge : pipeline.Edges()) {
        try {
            if (auto p = Accept(DeleteEdge(pipeline, edge, catalog), catalog, constraints)) {
                feasible.push_back(std::move(*p));
            }
        } catch (Error const&) {
        }
    }
    if (feasible.empty()) {
        return std::nullopt;
    }
    return std::move(feasible[rng.Index(feasible.size())]);
}

auto TryMutation(MutationOperator op, Pipeline const& pipeline, OperationCatalog const& catalog,
    StructuralConstraints const& constraints, Rng& rng, MutationAdvisor const* advisor) -> std::optional<Pipeline>
{
    switch (op) {
    case MutationOperator::NodeChange: return TryNodeChange(pipeline, catalog, constraints, rng, advisor);
    case MutationOperator::NodeAdd: return TryNodeAdd(pipeline, catalog, constraints, rng, advisor);
    case MutationOperator::NodeDelete: return TryNodeDelete(pipeline, catalog, constraints, rng);
    case MutationOperator::EdgeAdd: return TryEdgeAdd(pipeline, catalog, constraints, rng);
    case MutationOperator::EdgeDelete: return TryEdgeDelete(pipeline, catalog, constraints, rng);
    }
    return std::nullopt;
}

auto Mutate(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    MutationWeights const& weights, Rng& rng, MutationAdvisor const* advisor) -> MutationOutcome
{
    double total = 0.0;
    for (auto const& [op, w] : weights) {
        total += w;
    }
    if (!(total > 0.0)) {
        throw ConfigError("mutation weights must sum to a positive value");
    }
    for (int attempt = 0; attempt < kMutationAttempts; ++attempt) {
        auto draw = rng.Uniform01() * total;
        auto chosen = weights.begin()->first;
        for (auto const& [op, w] : weights) {
            chosen = op;
            if (draw < w) {
                break;
            }
            draw -= w;
        }
        if (auto mutated = TryMutation(chosen, pipeline, catalog, constraints, rng, advisor)) {
            return { std::move(*mutated), chosen };
        }
    }
    return { pipeline, std::nullopt };
}

auto Ancestors(Pipeline const& pipeline, std::string_view node_id) -> std::vector<std::string>
{
    std::set<std::string> seen;
    std::deque<std::string> frontier { std::string(node_id) };
    while (!frontier.empty()) {
        auto id = std::move(frontier.front());
        frontier.pop_front();
        for (auto& p : pipeline.Parents(id)) {
            if (seen.insert(p).second) {
                frontier.push_back(std::move(p));
            }
        }
    }
    return { seen.begin(), seen.end() };
}

namespace {

    // Nodes that reach the sink without passing through `excluded`.
    auto ReachSinkAvoiding(Pipeline const& pipeline, std::string const& excluded) -> std::set<std::string>
    {
        std::set<std::string> reach;
        auto const sinks = pipeline.Sinks();
        if (sinks.size() != 1 || sinks.front() == excluded) {
            return reach;
        }
        std::deque<std::string> frontier { sinks.front() };
        reach.insert(sinks.front());
        while (!frontier.empty()) {
            auto id = std::move(frontier.front());
            frontier.pop_front();
            for (auto& p : pipeline.Parents(id)) {
                if (p != excluded && reach.insert(p).second) {
                    frontier.push_back(std::move(p));
                }
            }
        }
        return reach;
    }

    auto Graft(Pipeline const& host, std::string const& host_node, Pipeline const& donor, std::string const& donor_node,
        OperationCatalog const& catalog, StructuralConstraints const& constraints) -> std::optional<Pipeline>
    {
        auto const reach = ReachSinkAvoiding(host, host_node);
        std::set<std::string> removed { host_node };
        for (auto const& a : Ancestors(host, host_node)) {
            if (!reach.contains(a)) {
                removed.insert(a);
            }
        }
        auto const children = host.Children(host_node);

        std::vector<OperationNode> nodes;
        std::set<std::string> used;
        for (auto const& n : host.Nodes()) {
            if (!removed.contains(n.id)) {
                nodes.push_back(n);
                used.insert(n.id);
            }
        }
        std::vector<Edge> edges;
        for (auto const& e : host.Edges()) {
            if (!removed.contains(e.source) && !removed.contains(e.target)) {
                edges.push_back(e);
            }
        }

        auto donor_set = Ancestors(donor, donor_node);
        donor_set.push_back(donor_node);
        std::ranges::sort(donor_set);
        std::map<std::string, std::string> rename;
        std::size_t counter = 0;
        for (auto const& d : donor_set) {
            std::string fresh;
            do {
                fresh = "n" + std::to_string(counter++);
            } while (used.contains(fresh));
            used.insert(fresh);
            rename[d] = fresh;
            auto node = *donor.Find(d);
            node.id = fresh;
            nodes.push_back(std::move(node));
        }
        for (auto const& e : donor.Edges()) {
            if (rename.contains(e.source) && rename.contains(e.target)) {
                edges.push_back({ rename[e.source], rename[e.target] });
            }
        }
        for (auto const& c : children) {
            edges.push_back({ rename[donor_node], c });
        }
        return Accept(Pipeline(std::move(nodes), std::move(edges)), catalog, constraints);
    }

} // namespace

auto CrossoverSubtree(Pipeline const& parent_a, Pipeline const& parent_b, OperationCatalog const& catalog,
    StructuralConstraints const& constraints, Rng& rng) -> CrossoverOutcome
{
    CrossoverOutcome out { parent_a, parent_b, false, false };
    if (parent_a == parent_b || (parent_a.Size() <= 1 && parent_b.Size() <= 1) || parent_a.Empty() || parent_b.Empty()) {
        return out;
    }
    auto const& node_a = parent_a.Nodes()[rng.Index(parent_a.Size())].id;
    auto const& node_b = parent_b.Nodes()[rng.Index(parent_b.Size())].id;
    if (auto child = Graft(parent_a, node_a, parent_b, node_b, catalog, constraints)) {
        out.first = std::move(*child);
        out.exchanged_first = true;
    }
    if (auto child = Graft(parent_b, node_b, parent_a, node_a, catalog, constraints)) {
        out.second = std::move(*child);
        out.exchanged_second = true;
    }
    return out;
}

} // namespace evosa
