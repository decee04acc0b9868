#ifndef EVOSA_VARIATION_HPP
#define EVOSA_VARIATION_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evosa/catalog.hpp"
#include "evosa/pipeline.hpp"
#include "evosa/random.hpp"

namespace evosa {

enum class MutationOperator { NodeChange, NodeAdd, NodeDelete, EdgeAdd, EdgeDelete };
enum class InsertionPlace { Child, Parent, Intermediate };

auto ToString(MutationOperator op) -> std::string_view;
auto ParseMutationOperator(std::string_view text) -> std::optional<MutationOperator>;

// Relative selection weights per operator; each must lie in [0, 1].
using MutationWeights = std::map<MutationOperator, double>;
auto UniformMutationWeights() -> MutationWeights;

// Operation labels around the node being changed or inserted.
struct MutationSite {
    std::vector<std::string> parent_ops;
    std::vector<std::string> child_ops;
    bool is_sink { false };
};

// Builds the mutated pipeline that would result from placing an operation at
// the site; nullopt when that placement is infeasible.
using PlacementBuilder = std::function<std::optional<Pipeline>(std::string const&)>;

// Chooses the operation for node_change / node_add. Implementations must be
// safe to call concurrently.
class MutationAdvisor {
public:
    MutationAdvisor() = default;
    MutationAdvisor(MutationAdvisor const&) = default;
    MutationAdvisor(MutationAdvisor&&) = default;
    auto operator=(MutationAdvisor const&) -> MutationAdvisor& = default;
    auto operator=(MutationAdvisor&&) -> MutationAdvisor& = default;
    virtual ~MutationAdvisor() = default;

    [[nodiscard]] virtual auto ChooseOperation(MutationSite const& site, std::vector<std::string> const& candidates,
        PlacementBuilder const& build, Rng& rng) const -> std::string = 0;
};

// Single attempts; nullopt when the drawn edit is infeasible or breaks constraints.
auto TryNodeChange(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    Rng& rng, MutationAdvisor const* advisor = nullptr) -> std::optional<Pipeline>;
auto TryNodeAdd(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    Rng& rng, MutationAdvisor const* advisor = nullptr, std::optional<InsertionPlace> place = std::nullopt) -> std::optional<Pipeline>;
auto TryNodeDelete(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints, Rng& rng) -> std::optional<Pipeline>;
auto TryEdgeAdd(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints, Rng& rng) -> std::optional<Pipeline>;
auto TryEdgeDelete(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints, Rng& rng) -> std::optional<Pipeline>;
auto TryMutation(MutationOperator op, Pipeline const& pipeline, OperationCatalog const& catalog,
    StructuralConstraints const& constraints, Rng& rng, MutationAdvisor const* advisor = nullptr) -> std::optional<Pipeline>;

struct MutationOutcome {
    Pipeline pipeline;
    std::optional<MutationOperator> applied; // empty when every attempt failed
};

inline constexpr int kMutationAttempts = 10;

// Draws an operator by weight and applies it, retrying up to kMutationAttempts
// times; returns the input unchanged if no attempt succeeds.
auto Mutate(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    MutationWeights const& weights, Rng& rng, MutationAdvisor const* advisor = nullptr) -> MutationOutcome;

struct CrossoverOutcome {
    Pipeline first;
    Pipeline second;
    bool exchanged_first { false };
    bool exchanged_second { false };
};

// Swaps the ancestor subgraph of one random node in each parent. Ancestors
// that still reach the sink by another path are kept. Offspring that fail
// validation or constraints fall back to a clone of the respective parent.
auto CrossoverSubtree(Pipeline const& parent_a, Pipeline const& parent_b, OperationCatalog const& catalog,
    StructuralConstraints const& constraints, Rng& rng) -> CrossoverOutcome;

// Ancestors of a node (excluding the node itself), sorted.
auto Ancestors(Pipeline const& pipeline, std::string_view node_id) -> std::vector<std::string>;

} // namespace evosa

#endif
