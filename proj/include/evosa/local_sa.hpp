#ifndef EVOSA_LOCAL_SA_HPP
#define EVOSA_LOCAL_SA_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evosa/dot.hpp"
#include "evosa/evaluator.hpp"
#include "evosa/optimizer.hpp"
#include "evosa/pipeline.hpp"

namespace evosa {

// Denominators of the sensitivity ratio are shifted to at least this value.
inline constexpr double kPositivityEpsilon = 1e-9;

// S = 1 - before / after, after shifting both qualities by the same amount so
// that min(before, after) >= kPositivityEpsilon. S > 0 iff after > before.
auto SensitivityIndex(double quality_before, double quality_after) -> double;

enum class SaTarget { Node, Edge };
enum class SaAction { Delete, Replace };

auto ToString(SaTarget target) -> std::string_view;
auto ToString(SaAction action) -> std::string_view;

struct SensitivityRecord {
    SaTarget target { SaTarget::Node };
    SaAction action { SaAction::Delete };
    std::string node_id;                // target node (node records)
    Edge edge;                          // target edge (edge records)
    std::string replacement_operation;  // node replacement
    std::optional<Edge> replacement_edge;
    double index { 0.0 };
    double quality_before { 0.0 };
    double quality_after { kWorstQuality };
    bool feasible { false };
    std::string note; // why a probe is infeasible

    [[nodiscard]] auto Describe() const -> std::string;
};

struct SAReport {
    Pipeline pipeline;
    FitnessReport baseline;
    // Node deletion, node replacement, edge deletion, edge replacement, in that order.
    std::vector<SensitivityRecord> records;
    // Evaluations of the probed pipelines, aligned with records (invalid for infeasible probes).
    std::vector<FitnessReport> probes;
    // Secondary-metric views of the same probes, keyed by metric name.
    std::map<std::string, std::vector<SensitivityRecord>> metric_reports;
    std::size_t evaluations { 0 };

    [[nodiscard]] auto Count(SaTarget target, SaAction action) const -> std::size_t;
};

struct SweepOptions {
    std::size_t candidate_budget { 3 };
    std::uint64_t seed { 0 };
    int jobs { 1 };
    std::optional<StructuralConstraints> constraints; // probes violating them are infeasible
    bool per_metric { false };                        // also build the "simplicity" (1 / nodes) sub-report
};

// Single probes. `baseline` skips re-evaluating the unedited pipeline.
auto NodeDeletionIndex(Pipeline const& pipeline, std::string_view node_id, Evaluator const& evaluator,
    OperationCatalog const& catalog, std::optional<double> baseline = std::nullopt) -> SensitivityRecord;
auto NodeReplacementIndex(Pipeline const& pipeline, std::string_view node_id, std::string_view replacement,
    Evaluator const& evaluator, OperationCatalog const& catalog, std::optional<double> baseline = std::nullopt) -> SensitivityRecord;
auto EdgeDeletionIndex(Pipeline const& pipeline, Edge const& edge, Evaluator const& evaluator,
    OperationCatalog const& catalog, std::optional<double> baseline = std::nullopt) -> SensitivityRecord;
auto EdgeReplacementIndex(Pipeline const& pipeline, Edge const& edge, Edge const& candidate, Evaluator const& evaluator,
    OperationCatalog const& catalog, std::optional<double> baseline = std::nullopt) -> SensitivityRecord;

// Rebuilds the edited pipeline a record describes, applied to `pipeline`.
// Throws StructuralError / ConstraintError when the edit does not apply.
auto ApplyRecord(Pipeline const& pipeline, SensitivityRecord const& record, OperationCatalog const& catalog) -> Pipeline;

// Runs the four analyses in order. Replacement candidates are sampled
// deterministically from the seed: up to candidate_budget operations per node
// and candidate_budget feasible non-edges per edge. Costs one evaluation for
// the baseline plus one per feasible record. The serial reference evaluates
// probes in order; the parallel variant evaluates them concurrently.
auto FullSweep(Pipeline const& pipeline, Evaluator const& evaluator, OperationCatalog const& catalog, SweepOptions const& options = {}) -> SAReport;
auto FullSweepSerial(Pipeline const& pipeline, Evaluator const& evaluator, OperationCatalog const& catalog, SweepOptions options = {}) -> SAReport;

struct SimplificationResult {
    Pipeline pipeline;
    FitnessReport fitness;
    std::vector<SensitivityRecord> applied;
    std::size_t evaluations { 0 };
};

inline constexpr std::size_t kMaxSimplificationSteps = 64;

// Greedy: applies the feasible action with the largest index while it exceeds
// threshold. After each application the neighbourhood of the edit is
// re-probed; records from elsewhere are re-checked against the current
// pipeline before they may be applied. With threshold >= 0 and a
// deterministic evaluator quality never decreases.
auto ApplySimplifications(Pipeline const& pipeline, SAReport const& report, Evaluator const& evaluator,
    OperationCatalog const& catalog, double threshold = 0.0, SweepOptions const& options = {}) -> SimplificationResult;

// Every K-th generation (generation % K == 0, generation > 0) sweeps and
// simplifies the N best individuals. Returns population indices it replaced.
auto SaEvolutionHook(std::vector<Individual>& population, GenerationContext const& context) -> std::vector<std::size_t>;

class LocalSaHook final : public GenerationHook {
public:
    auto Apply(std::vector<Individual>& population, GenerationContext const& context) -> std::vector<std::size_t> override
    {
        return SaEvolutionHook(population, context);
    }
};

// Node and edge deletion indices of feasible records, for DOT export.
auto AnnotationsFrom(SAReport const& report) -> DotAnnotations;
auto ToDot(Pipeline const& pipeline, SAReport const& report) -> std::string;

auto SerializeReport(SAReport const& report) -> std::string;

// Feasible records with index > 0 ordered by index, largest first.
auto RankedSuggestions(SAReport const& report) -> std::vector<SensitivityRecord>;

} // namespace evosa

#endif
