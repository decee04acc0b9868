#ifndef EVOSA_REPORTING_HPP
#define EVOSA_REPORTING_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evosa/catalog.hpp"
#include "evosa/evaluator.hpp"
#include "evosa/local_sa.hpp"
#include "evosa/optimizer.hpp"
#include "evosa/sampling.hpp"

namespace evosa {

// Columns: generation, wall_seconds, best_quality, mean_quality, best_complexity.
// With fixed_clock the wall_seconds column is written as 0 so repeated runs
// produce identical files.
auto ConvergenceCsv(std::span<GenerationStats const> stats, bool fixed_clock = false) -> std::string;

// Text table of ranked simplification suggestions.
auto SuggestionTable(std::span<SensitivityRecord const> suggestions) -> std::string;

enum class BenchArm { Plain, LocalSa, GlobalSa };

auto ToString(BenchArm arm) -> std::string_view;
auto ParseBenchArm(std::string_view text) -> std::optional<BenchArm>;

struct BenchDataset {
    std::string name;
    std::shared_ptr<Evaluator const> evaluator;
};

struct BenchSettings {
    EvolutionConfig base;
    StructuralConstraints constraints;
    std::vector<std::uint64_t> seeds;
    std::vector<BenchArm> arms { BenchArm::Plain, BenchArm::LocalSa, BenchArm::GlobalSa };

    // global SA arm: mode and the warm-start history sampled per dataset
    GlobalSaMode global_mode { GlobalSaMode::Suitability };
    std::size_t history_records { 500 };
    HistoryDesign history_design { HistoryDesign::Balanced };
    std::uint64_t history_seed { 0xB0 };
};

// Benchmark defaults: 20 individuals, 40 generations, local SA on the single
// best individual every 10th generation with one candidate per replacement.
auto DefaultBenchSettings() -> BenchSettings;

struct BenchRun {
    std::string dataset;
    BenchArm arm { BenchArm::Plain };
    std::uint64_t seed { 0 };
    std::vector<GenerationStats> convergence;
    double final_quality { kWorstQuality };
    std::size_t final_complexity { 0 };
    std::size_t evaluations { 0 };
    std::size_t evaluated_individuals { 0 };
    std::size_t structural_violations { 0 }; // evaluated pipelines failing Validate or constraints
};

struct ArmSummary {
    std::string dataset;
    BenchArm arm { BenchArm::Plain };
    std::size_t runs { 0 };
    double target { 0.0 };                          // plain arm's median final quality
    std::optional<double> evaluations_to_target;    // along the median convergence curve
    double median_final_complexity { 0.0 };
    double median_final_quality { 0.0 };
    double stddev_final_quality { 0.0 };
    double median_evaluations { 0.0 };
};

struct BenchReport {
    std::vector<BenchRun> runs;
    std::vector<ArmSummary> summaries; // one per dataset and arm
};

auto Median(std::vector<double> values) -> double;
auto SampleStdDev(std::span<double const> values) -> double;

// Median best quality and median cumulative evaluations per generation across
// runs; the first generation whose median quality reaches target gives the
// evaluation count. Runs are aligned by generation index and truncated to
// the shortest.
auto MedianCurveEvaluationsToTarget(std::span<std::vector<GenerationStats> const> curves, double target) -> std::optional<double>;

// Paired design: every arm runs every seed on every dataset.
auto RunBenchmark(std::span<BenchDataset const> datasets, OperationCatalog const& catalog, BenchSettings const& settings) -> BenchReport;

auto Summarize(std::span<BenchRun const> runs) -> std::vector<ArmSummary>;

auto BenchSummaryTable(std::span<ArmSummary const> summaries) -> std::string;
auto BenchSummaryCsv(std::span<ArmSummary const> summaries) -> std::string;
auto BenchRunsCsv(std::span<BenchRun const> runs) -> std::string;

} // namespace evosa

#endif
