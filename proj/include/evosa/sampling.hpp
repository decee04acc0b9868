#ifndef EVOSA_SAMPLING_HPP
#define EVOSA_SAMPLING_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evosa/catalog.hpp"
#include "evosa/evaluator.hpp"
#include "evosa/history.hpp"
#include "evosa/pipeline.hpp"
#include "evosa/random.hpp"

namespace evosa {

// Uniform: RandomPipeline draws. Balanced: every catalog operation appears
// exactly once, so pipelines differ only in wiring.
enum class HistoryDesign { Uniform, Balanced };

auto ToString(HistoryDesign design) -> std::string_view;
auto ParseHistoryDesign(std::string_view text) -> std::optional<HistoryDesign>;

// All catalog operations in a random order with a sink-capable model last.
// Each node feeds one random later node, plus a second one with probability
// 1/2. Throws ConfigError if the catalog has no sink-capable operation.
auto BalancedPipeline(OperationCatalog const& catalog, Rng& rng) -> Pipeline;

// Evaluates `count` sampled pipelines and keeps the valid ones.
auto SampleHistory(Evaluator const& evaluator, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    std::size_t count, std::uint64_t seed, HistoryDesign design, std::string const& run_id, std::string const& dataset_id)
    -> std::vector<HistoryRecord>;

} // namespace evosa

#endif
