#include "evosa/pipeline.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>

#include "evosa/error.hpp"
#include "evosa/json_io.hpp"

namespace evosa {

auto ToString(Edge const& edge) -> std::string
{
    return edge.source + "->" + edge.target;
}

Pipeline::Pipeline(std::vector<OperationNode> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes))
    , edges_(std::move(edges))
{
    std::ranges::stable_sort(nodes_, {}, &OperationNode::id);
    std::ranges::sort(edges_);
}

auto Pipeline::Find(std::string_view id) const -> OperationNode const*
{
    auto it = std::ranges::lower_bound(nodes_, id, {}, [](auto const& n) -> std::string_view { return n.id; });
    return (it != nodes_.end() && it->id == id) ? &*it : nullptr;
}

auto Pipeline::HasEdge(Edge const& edge) const -> bool
{
    return std::ranges::binary_search(edges_, edge);
}

auto Pipeline::Parents(std::string_view id) const -> std::vector<std::string>
{
    std::vector<std::string> out;
    for (auto const& e : edges_) {
        if (e.target == id) {
            out.push_back(e.source);
        }
    }
    std::ranges::sort(out);
    return out;
}

auto Pipeline::Children(std::string_view id) const -> std::vector<std::string>
{
    std::vector<std::string> out;
    for (auto const& e : edges_) {
        if (e.source == id) {
            out.push_back(e.target);
        }
    }
    return out; // edges are sorted by source then target
}

auto Pipeline::Sinks() const -> std::vector<std::string>
{
    std::set<std::string_view> has_out;
    for (auto const& e : edges_) {
        has_out.insert(e.source);
    }
    std::vector<std::string> out;
    for (auto const& n : nodes_) {
        if (!has_out.contains(n.id)) {
            out.push_back(n.id);
        }
    }
    return out;
}

auto Pipeline::Sources() const -> std::vector<std::string>
{
    std::set<std::string_view> has_in;
    for (auto const& e : edges_) {
        has_in.insert(e.target);
    }
    std::vector<std::string> out;
    for (auto const& n : nodes_) {
        if (!has_in.contains(n.id)) {
            out.push_back(n.id);
        }
    }
    return out;
}

auto Pipeline::OperationOf(std::string_view id) const -> std::string const&
{
    if (auto const* node = Find(id)) {
        return node->operation;
    }
    throw StructuralError("unknown node '" + std::string(id) + "'");
}

auto Pipeline::FreshId() const -> std::string
{
    for (std::size_t k = 0;; ++k) {
        auto id = "n" + std::to_string(k);
        if (!Contains(id)) {
            return id;
        }
    }
}

auto ToString(ViolationKind kind) -> std::string_view
{
    switch (kind) {
    case ViolationKind::EmptyPipeline: return "empty pipeline";
    case ViolationKind::DuplicateNodeId: return "duplicate node id";
    case ViolationKind::UnknownOperation: return "unknown operation";
    case ViolationKind::DanglingEdge: return "dangling edge";
    case ViolationKind::SelfLoop: return "self-loop";
    case ViolationKind::DuplicateEdge: return "duplicate edge";
    case ViolationKind::Cycle: return "cycle";
    case ViolationKind::NoSink: return "no sink";
    case ViolationKind::MultipleSinks: return "two sinks";
    case ViolationKind::SinkNotModel: return "sink is not a model";
    case ViolationKind::NotConnected: return "not connected";
    }
    return "unknown";
}

auto ValidationResult::Has(ViolationKind kind) const -> bool
{
    return std::ranges::any_of(violations, [kind](auto const& v) { return v.kind == kind; });
}

auto ValidationResult::Describe() const -> std::string
{
    std::string out;
    for (auto const& v : violations) {
        if (!out.empty()) {
            out += "; ";
        }
        out += v.message;
    }
    return out;
}

namespace {

    // Kahn's algorithm over edges whose endpoints exist; returns the processed order.
    auto KahnOrder(Pipeline const& pipeline) -> std::vector<std::string>
    {
        std::map<std::string_view, std::size_t> indegree;
        std::map<std::string_view, std::vector<std::string_view>> out;
        for (auto const& n : pipeline.Nodes()) {
            indegree.try_emplace(n.id, 0);
        }
        for (auto const& e : pipeline.Edges()) {
            if (!indegree.contains(e.source) || !indegree.contains(e.target) || e.source == e.target) {
                continue;
            }
            ++indegree[e.target];
            out[e.source].push_back(e.target);
        }
        std::priority_queue<std::string_view, std::vector<std::string_view>, std::greater<>> ready;
        for (auto const& [id, deg] : indegree) {
            if (deg == 0) {
                ready.push(id);
            }
        }
        std::vector<std::string> order;
        order.reserve(indegree.size());
        while (!ready.empty()) {
            auto id = ready.top();
            ready.pop();
            order.emplace_back(id);
            for (auto child : out[id]) {
                if (--indegree[child] == 0) {
                    ready.push(child);
                }
            }
        }
        return order;
    }

    auto Find(std::vector<std::size_t>& parent, std::size_t x) -> std::size_t
    {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

} // namespace

auto Validate(Pipeline const& pipeline, OperationCatalog const& catalog) -> ValidationResult
{
    ValidationResult result;
    auto add = [&](ViolationKind kind, std::string detail) {
        auto message = std::string(ToString(kind));
        if (!detail.empty()) {
            message += ": " + detail;
        }
        result.violations.push_back({ kind, std::move(message) });
    };

    auto const& nodes = pipeline.Nodes();
    if (nodes.empty()) {
        add(ViolationKind::EmptyPipeline, "");
        return result;
    }

    std::map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!index.try_emplace(nodes[i].id, i).second) {
            add(ViolationKind::DuplicateNodeId, nodes[i].id);
        }
        if (!catalog.Contains(nodes[i].operation)) {
            add(ViolationKind::UnknownOperation, nodes[i].id + " uses '" + nodes[i].operation + "'");
        }
    }

    std::vector<std::size_t> components(nodes.size());
    std::iota(components.begin(), components.end(), 0);
    std::set<std::string_view> has_out;
    Edge const* previous = nullptr;
    for (auto const& e : pipeline.Edges()) {
        if (previous != nullptr && *previous == e) {
            add(ViolationKind::DuplicateEdge, ToString(e));
        }
        previous = &e;
        bool const dangling = !index.contains(e.source) || !index.contains(e.target);
        if (dangling) {
            add(ViolationKind::DanglingEdge, ToString(e));
            continue;
        }
        if (e.source == e.target) {
            add(ViolationKind::SelfLoop, ToString(e));
            continue;
        }
        has_out.insert(e.source);
        auto a = Find(components, index[e.source]);
        auto b = Find(components, index[e.target]);
        components[a] = b;
    }

    if (KahnOrder(pipeline).size() != index.size()) {
        add(ViolationKind::Cycle, "");
    }

    std::vector<std::string> sinks;
    for (auto const& [id, i] : index) {
        if (!has_out.contains(id)) {
            sinks.emplace_back(id);
        }
    }
    if (sinks.empty()) {
        add(ViolationKind::NoSink, "");
    } else if (sinks.size() > 1) {
        std::string list;
        for (auto const& s : sinks) {
            list += (list.empty() ? "" : ", ") + s;
        }
        add(ViolationKind::MultipleSinks, list);
    } else {
        auto const* spec = catalog.Find(pipeline.OperationOf(sinks.front()));
        if (spec != nullptr && (spec->kind != OperationKind::Model || !spec->may_be_sink)) {
            add(ViolationKind::SinkNotModel, sinks.front() + " is '" + spec->name + "'");
        }
    }

    std::set<std::size_t> roots;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        roots.insert(Find(components, i));
    }
    if (roots.size() > 1) {
        add(ViolationKind::NotConnected, std::to_string(roots.size()) + " components");
    }
    return result;
}

auto TopologicalOrder(Pipeline const& pipeline) -> std::vector<std::string>
{
    auto order = KahnOrder(pipeline);
    if (order.size() != pipeline.Size()) {
        throw StructuralError("cycle detected");
    }
    return order;
}

auto Depth(Pipeline const& pipeline) -> std::size_t
{
    if (pipeline.Empty()) {
        return 0;
    }
    std::map<std::string, std::size_t> longest;
    std::size_t deepest = 1;
    for (auto const& id : TopologicalOrder(pipeline)) {
        std::size_t d = 1;
        for (auto const& p : pipeline.Parents(id)) {
            d = std::max(d, longest[p] + 1);
        }
        longest[id] = d;
        deepest = std::max(deepest, d);
    }
    return deepest;
}

auto MaxParents(Pipeline const& pipeline) -> std::size_t
{
    std::map<std::string_view, std::size_t> indegree;
    std::size_t most = 0;
    for (auto const& e : pipeline.Edges()) {
        most = std::max(most, ++indegree[e.target]);
    }
    return most;
}

auto SatisfiesConstraints(Pipeline const& pipeline, StructuralConstraints const& constraints) -> bool
{
    return pipeline.Size() <= constraints.max_nodes
        && MaxParents(pipeline) <= constraints.max_parents_per_node
        && Depth(pipeline) <= constraints.max_depth;
}

auto StructuralComplexity(Pipeline const& pipeline) -> std::size_t
{
    return pipeline.Size();
}

namespace {

    auto Checked(Pipeline candidate, OperationCatalog const& catalog, std::string_view what) -> Pipeline
    {
        auto verdict = Validate(candidate, catalog);
        if (!verdict.Ok()) {
            throw StructuralError(std::string(what) + " is infeasible: " + verdict.Describe());
        }
        return candidate;
    }

    void RequireNode(Pipeline const& pipeline, std::string_view id)
    {
        if (!pipeline.Contains(id)) {
            throw StructuralError("unknown node '" + std::string(id) + "'");
        }
    }

} // namespace

auto BridgeEdges(Pipeline const& pipeline, std::string_view node_id) -> std::vector<Edge>
{
    auto const children = pipeline.Children(node_id);
    if (children.empty()) {
        return {};
    }
    auto const& target = children.front();
    std::vector<Edge> bridges;
    for (auto const& parent : pipeline.Parents(node_id)) {
        Edge bridge { parent, target };
        if (!pipeline.HasEdge(bridge)) {
            bridges.push_back(std::move(bridge));
        }
    }
    return bridges;
}

auto DeleteNode(Pipeline const& pipeline, std::string_view node_id, OperationCatalog const& catalog) -> Pipeline
{
    RequireNode(pipeline, node_id);
    if (pipeline.Size() == 1) {
        throw StructuralError("cannot empty pipeline");
    }
    std::vector<OperationNode> nodes;
    for (auto const& n : pipeline.Nodes()) {
        if (n.id != node_id) {
            nodes.push_back(n);
        }
    }
    std::vector<Edge> edges;
    for (auto const& e : pipeline.Edges()) {
        if (e.source != node_id && e.target != node_id) {
            edges.push_back(e);
        }
    }
    for (auto& bridge : BridgeEdges(pipeline, node_id)) {
        edges.push_back(std::move(bridge));
    }
    return Checked(Pipeline(std::move(nodes), std::move(edges)), catalog, "deleting node " + std::string(node_id));
}

auto ReplaceNode(Pipeline const& pipeline, std::string_view node_id, std::string_view operation, OperationCatalog const& catalog) -> Pipeline
{
    RequireNode(pipeline, node_id);
    auto const* spec = catalog.Find(operation);
    if (spec == nullptr) {
        throw ConstraintError("unknown operation '" + std::string(operation) + "'");
    }
    if (pipeline.Children(node_id).empty() && !spec->may_be_sink) {
        throw ConstraintError("'" + spec->name + "' cannot be the sink");
    }
    auto nodes = pipeline.Nodes();
    for (auto& n : nodes) {
        if (n.id == node_id) {
            n.operation = spec->name;
            n.params = spec->default_params;
        }
    }
    return Checked(Pipeline(std::move(nodes), pipeline.Edges()), catalog, "replacing node " + std::string(node_id));
}

auto DeleteEdge(Pipeline const& pipeline, Edge const& edge, OperationCatalog const& catalog) -> Pipeline
{
    if (!pipeline.HasEdge(edge)) {
        throw StructuralError("no edge " + ToString(edge));
    }
    std::vector<Edge> edges;
    for (auto const& e : pipeline.Edges()) {
        if (e != edge) {
            edges.push_back(e);
        }
    }
    return Checked(Pipeline(pipeline.Nodes(), std::move(edges)), catalog, "deleting edge " + ToString(edge));
}

auto ReplaceEdge(Pipeline const& pipeline, Edge const& edge, Edge const& replacement, OperationCatalog const& catalog) -> Pipeline
{
    if (!pipeline.HasEdge(edge)) {
        throw StructuralError("no edge " + ToString(edge));
    }
    if (pipeline.HasEdge(replacement)) {
        throw StructuralError("edge " + ToString(replacement) + " already present");
    }
    std::vector<Edge> edges;
    for (auto const& e : pipeline.Edges()) {
        if (e != edge) {
            edges.push_back(e);
        }
    }
    edges.push_back(replacement);
    return Checked(Pipeline(pipeline.Nodes(), std::move(edges)), catalog,
        "replacing edge " + ToString(edge) + " with " + ToString(replacement));
}

auto AddEdge(Pipeline const& pipeline, Edge const& edge, OperationCatalog const& catalog) -> Pipeline
{
    if (pipeline.HasEdge(edge)) {
        throw StructuralError("edge " + ToString(edge) + " already present");
    }
    auto edges = pipeline.Edges();
    edges.push_back(edge);
    return Checked(Pipeline(pipeline.Nodes(), std::move(edges)), catalog, "adding edge " + ToString(edge));
}

auto Serialize(Pipeline const& pipeline) -> std::string
{
    return PipelineToJson(pipeline).dump(2) + "\n";
}

auto Deserialize(std::string_view document) -> Pipeline
{
    return PipelineFromJson(ParseJsonDocument(document));
}

} // namespace evosa
