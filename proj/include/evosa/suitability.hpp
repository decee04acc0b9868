#ifndef EVOSA_SUITABILITY_HPP
#define EVOSA_SUITABILITY_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evosa/catalog.hpp"
#include "evosa/history.hpp"
#include "evosa/pipeline.hpp"
#include "evosa/random.hpp"
#include "evosa/variation.hpp"

namespace evosa {

// Rn for each fitness: ascending position / count, ties share the mean
// position, so the best gets 1.0.
auto NormalizedRank(std::span<double const> fitness) -> std::vector<double>;

// Rn of every record, ranked within its own dataset.
auto NormalizedRanksByDataset(std::span<HistoryRecord const> records) -> std::vector<double>;

using OperationPair = std::pair<std::string, std::string>;

struct SuitabilityCell {
    double value { 0.0 };
    std::size_t support { 0 };

    friend auto operator==(SuitabilityCell const&, SuitabilityCell const&) -> bool = default;
};

// Mean normalized rank per (from, to) operation pair. Unobserved pairs are
// absent rather than zero.
class SuitabilityTable {
public:
    [[nodiscard]] auto Get(std::string const& from, std::string const& to) const -> std::optional<double>;
    [[nodiscard]] auto Support(std::string const& from, std::string const& to) const -> std::size_t;
    void Set(std::string const& from, std::string const& to, double value, std::size_t support = 1);

    [[nodiscard]] auto Cells() const -> std::map<OperationPair, SuitabilityCell> const& { return cells_; }
    [[nodiscard]] auto Empty() const -> bool { return cells_.empty(); }
    // Every operation appearing in some cell, sorted.
    [[nodiscard]] auto Operations() const -> std::vector<std::string>;

    [[nodiscard]] auto ToJson() const -> nlohmann::json;
    static auto FromJson(nlohmann::json const& doc) -> SuitabilityTable;
    // Rows are sources, columns targets; "-" marks absent cells.
    [[nodiscard]] auto Grid(std::vector<std::string> const& operations = {}) const -> std::string;

    friend auto operator==(SuitabilityTable const&, SuitabilityTable const&) -> bool = default;

private:
    std::map<OperationPair, SuitabilityCell> cells_;
};

// Each pipeline counts once per pair it contains.
auto BuildSuitabilityTable(std::span<HistoryRecord const> history) -> SuitabilityTable;

inline constexpr double kNeutralSuitability = 0.5;
inline constexpr double kFallbackScore = 0.1;

// Sum of parent->candidate and candidate->child cells; absent cells count as
// kNeutralSuitability.
auto DirectedScores(std::vector<std::string> const& parent_ops, std::vector<std::string> const& child_ops,
    std::vector<std::string> const& candidates, SuitabilityTable const& table) -> std::vector<double>;

// Drops negative scores, falls back to a uniform draw over all candidates
// when the best score is below kFallbackScore, otherwise draws by weight.
auto ChooseNodeDirected(std::vector<std::string> const& parent_ops, std::vector<std::string> const& child_ops,
    std::vector<std::string> const& candidates, SuitabilityTable const& table, Rng& rng) -> std::string;

// Exact selection probabilities ChooseNodeDirected uses for each candidate.
auto DirectedProbabilities(std::vector<std::string> const& parent_ops, std::vector<std::string> const& child_ops,
    std::vector<std::string> const& candidates, SuitabilityTable const& table) -> std::vector<double>;

class SuitabilityAdvisor final : public MutationAdvisor {
public:
    explicit SuitabilityAdvisor(SuitabilityTable table)
        : table_(std::move(table))
    {
    }

    [[nodiscard]] auto ChooseOperation(MutationSite const& site, std::vector<std::string> const& candidates,
        PlacementBuilder const& build, Rng& rng) const -> std::string override;

    [[nodiscard]] auto Table() const -> SuitabilityTable const& { return table_; }

private:
    SuitabilityTable table_;
};

// Node change / node add with table-directed operation choice; retried up to
// kMutationAttempts times, then the input is returned unchanged.
auto DirectedNodeChange(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    SuitabilityTable const& table, Rng& rng) -> Pipeline;
auto DirectedNodeAdd(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    SuitabilityTable const& table, Rng& rng) -> Pipeline;

} // namespace evosa

#endif
