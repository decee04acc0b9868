#ifndef EVOSA_SEARCH_SPACE_HPP
#define EVOSA_SEARCH_SPACE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "evosa/catalog.hpp"
#include "evosa/pipeline.hpp"

namespace evosa {

struct PositionContext {
    std::vector<OperationKind> parent_kinds;
    std::vector<OperationKind> child_kinds;
    bool is_sink { false };
};

// Operations that may be placed at a position; sink positions admit only
// sink-capable models.
auto CandidateOperations(OperationCatalog const& catalog, PositionContext const& context) -> std::vector<std::string>;

// Grows a pipeline backwards from a model sink. Deterministic in seed; the
// result passes Validate and satisfies constraints. Throws ConfigError when
// no sink-capable operation exists or constraints are malformed.
auto RandomPipeline(OperationCatalog const& catalog, StructuralConstraints const& constraints, std::uint64_t seed) -> Pipeline;

} // namespace evosa

#endif
