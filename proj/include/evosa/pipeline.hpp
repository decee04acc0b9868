#ifndef EVOSA_PIPELINE_HPP
#define EVOSA_PIPELINE_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evosa/catalog.hpp"

namespace evosa {

struct OperationNode {
    std::string id;
    std::string operation;
    Params params;

    friend auto operator==(OperationNode const&, OperationNode const&) -> bool = default;
};

struct Edge {
    std::string source;
    std::string target;

    friend auto operator<=>(Edge const&, Edge const&) = default;
};

auto ToString(Edge const& edge) -> std::string;

// A DAG of operation nodes. Values are immutable: nodes and edges are kept
// sorted (by id, by (source, target)) so equal graphs compare and serialize
// identically. Construction never rejects a graph; Validate reports problems.
class Pipeline {
public:
    Pipeline() = default;
    Pipeline(std::vector<OperationNode> nodes, std::vector<Edge> edges);

    [[nodiscard]] auto Nodes() const -> std::vector<OperationNode> const& { return nodes_; }
    [[nodiscard]] auto Edges() const -> std::vector<Edge> const& { return edges_; }
    [[nodiscard]] auto Size() const -> std::size_t { return nodes_.size(); }
    [[nodiscard]] auto Empty() const -> bool { return nodes_.empty(); }

    [[nodiscard]] auto Find(std::string_view id) const -> OperationNode const*;
    [[nodiscard]] auto Contains(std::string_view id) const -> bool { return Find(id) != nullptr; }
    [[nodiscard]] auto HasEdge(Edge const& edge) const -> bool;

    // Sorted id lists.
    [[nodiscard]] auto Parents(std::string_view id) const -> std::vector<std::string>;
    [[nodiscard]] auto Children(std::string_view id) const -> std::vector<std::string>;
    [[nodiscard]] auto Sinks() const -> std::vector<std::string>;
    [[nodiscard]] auto Sources() const -> std::vector<std::string>;

    // Operation label of a node; throws StructuralError for unknown ids.
    [[nodiscard]] auto OperationOf(std::string_view id) const -> std::string const&;

    // Smallest "n<k>" not used as a node id.
    [[nodiscard]] auto FreshId() const -> std::string;

    friend auto operator==(Pipeline const&, Pipeline const&) -> bool = default;

private:
    std::vector<OperationNode> nodes_;
    std::vector<Edge> edges_;
};

enum class ViolationKind {
    EmptyPipeline,
    DuplicateNodeId,
    UnknownOperation,
    DanglingEdge,
    SelfLoop,
    DuplicateEdge,
    Cycle,
    NoSink,
    MultipleSinks,
    SinkNotModel,
    NotConnected,
};

auto ToString(ViolationKind kind) -> std::string_view;

struct Violation {
    ViolationKind kind;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;

    [[nodiscard]] auto Ok() const -> bool { return violations.empty(); }
    [[nodiscard]] auto Has(ViolationKind kind) const -> bool;
    [[nodiscard]] auto Describe() const -> std::string;
};

// Collects every violated rule, not just the first.
auto Validate(Pipeline const& pipeline, OperationCatalog const& catalog) -> ValidationResult;

// Kahn's algorithm with lexicographic tie-breaking. Throws StructuralError on a cycle.
auto TopologicalOrder(Pipeline const& pipeline) -> std::vector<std::string>;

// Longest source-to-sink path, counted in nodes. Pipeline must be acyclic.
auto Depth(Pipeline const& pipeline) -> std::size_t;
auto MaxParents(Pipeline const& pipeline) -> std::size_t;
auto SatisfiesConstraints(Pipeline const& pipeline, StructuralConstraints const& constraints) -> bool;

// Number of nodes.
auto StructuralComplexity(Pipeline const& pipeline) -> std::size_t;

// Structural edits. Each returns a pipeline that passes Validate or throws
// StructuralError (infeasible) / ConstraintError (bad operation).
auto DeleteNode(Pipeline const& pipeline, std::string_view node_id, OperationCatalog const& catalog) -> Pipeline;
auto ReplaceNode(Pipeline const& pipeline, std::string_view node_id, std::string_view operation, OperationCatalog const& catalog) -> Pipeline;
auto DeleteEdge(Pipeline const& pipeline, Edge const& edge, OperationCatalog const& catalog) -> Pipeline;
auto ReplaceEdge(Pipeline const& pipeline, Edge const& edge, Edge const& replacement, OperationCatalog const& catalog) -> Pipeline;
auto AddEdge(Pipeline const& pipeline, Edge const& edge, OperationCatalog const& catalog) -> Pipeline;

// Edges that DeleteNode adds to bridge the deleted node's parents to its
// smallest child (already-present edges are not repeated).
auto BridgeEdges(Pipeline const& pipeline, std::string_view node_id) -> std::vector<Edge>;

// Canonical document: {"edges": [[src, dst], ...], "format_version": 1, "nodes": [{id, operation, params}]}
auto Serialize(Pipeline const& pipeline) -> std::string;
// Throws ParseError naming the offending location.
auto Deserialize(std::string_view document) -> Pipeline;

} // namespace evosa

#endif
