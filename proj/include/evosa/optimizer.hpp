#ifndef EVOSA_OPTIMIZER_HPP
#define EVOSA_OPTIMIZER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evosa/catalog.hpp"
#include "evosa/evaluator.hpp"
#include "evosa/pipeline.hpp"
#include "evosa/random.hpp"
#include "evosa/variation.hpp"

namespace evosa {

struct Lineage {
    std::vector<std::uint64_t> parents;
    std::string operation; // "init", "clone", "crossover", "sa", optionally suffixed "+<mutation>"
};

struct Individual {
    std::uint64_t id { 0 };
    Pipeline pipeline;
    std::optional<FitnessReport> fitness;
    Lineage lineage;

    [[nodiscard]] auto Valid() const -> bool { return fitness.has_value() && fitness->valid; }
    [[nodiscard]] auto Quality() const -> double { return fitness ? fitness->quality : kWorstQuality; }
};

enum class GlobalSaMode { Off, Suitability, MetaModel };

auto ToString(GlobalSaMode mode) -> std::string_view;
auto ParseGlobalSaMode(std::string_view text) -> std::optional<GlobalSaMode>;

struct EvolutionConfig {
    std::size_t population_size { 20 };
    std::size_t max_generations { 30 };
    double timeout_seconds { 60.0 };
    MutationWeights mutation_rates { UniformMutationWeights() };
    double mutation_probability { 1.0 };
    double crossover_rate { 0.3 };
    std::size_t elitism { 1 };
    std::size_t tournament_k { 3 };

    bool local_sa { false };
    std::size_t sa_cadence_K { 5 };
    std::size_t sa_top_N { 3 };
    double sa_threshold { 0.0 };
    std::size_t sa_candidate_budget { 3 };

    GlobalSaMode global_sa_mode { GlobalSaMode::Off };
    std::uint64_t rng_seed { 0 };
    int jobs { 1 };                  // 1 = serial, reproducible ordering
    bool cache_evaluations { true }; // memoize reports of identical pipelines

    void Check() const; // throws ConfigError
};

struct EvaluationEvent {
    std::size_t generation { 0 };
    std::uint64_t individual_id { 0 };
    Pipeline pipeline;
    FitnessReport fitness;
    std::string operation;
    std::vector<std::uint64_t> parents;
};

class HistorySink {
public:
    HistorySink() = default;
    HistorySink(HistorySink const&) = default;
    HistorySink(HistorySink&&) = default;
    auto operator=(HistorySink const&) -> HistorySink& = default;
    auto operator=(HistorySink&&) -> HistorySink& = default;
    virtual ~HistorySink() = default;

    virtual void Record(EvaluationEvent const& event) = 0;
};

// Everything a per-generation hook needs to edit the population.
struct GenerationContext {
    std::size_t generation { 0 };
    EvolutionConfig const& config;
    Evaluator const& evaluator;
    OperationCatalog const& catalog;
    StructuralConstraints const& constraints;
    Rng& rng;
    std::uint64_t& next_id;
};

class GenerationHook {
public:
    GenerationHook() = default;
    GenerationHook(GenerationHook const&) = default;
    GenerationHook(GenerationHook&&) = default;
    auto operator=(GenerationHook const&) -> GenerationHook& = default;
    auto operator=(GenerationHook&&) -> GenerationHook& = default;
    virtual ~GenerationHook() = default;

    // Called after each generation >= 1 is evaluated; returns the individuals
    // it replaced so they can be recorded.
    virtual auto Apply(std::vector<Individual>& population, GenerationContext const& context) -> std::vector<std::size_t> = 0;
};

struct GenerationStats {
    std::size_t generation { 0 };
    double wall_seconds { 0.0 };
    double best_quality { kWorstQuality };
    double mean_quality { kWorstQuality };
    std::size_t best_complexity { 0 };
    std::size_t evaluations { 0 }; // cumulative evaluator calls
};

struct RunResult {
    Individual best;
    std::vector<Individual> pareto_front;
    std::vector<Individual> population;
    std::vector<GenerationStats> convergence;
    std::vector<EvaluationEvent> history;
    std::size_t evaluations { 0 };
    bool timed_out { false };
};

struct EvolveOptions {
    HistorySink* history { nullptr };
    MutationAdvisor const* advisor { nullptr };
    GenerationHook* hook { nullptr }; // when null and config.local_sa is set, the local SA hook runs
};

// Non-dominated sorting under (maximize quality, minimize complexity). Valid
// individuals get ranks 0, 1, ...; invalid or unevaluated ones rank last.
auto ParetoRanks(std::span<Individual const> population) -> std::vector<std::size_t>;

// Rank-0 individuals, stably ordered by quality descending.
auto ParetoFront(std::span<Individual const> population) -> std::vector<Individual>;

// True if a should be preferred: valid first, then lower Pareto rank, higher
// quality, lower complexity.
auto Better(Individual const& a, std::size_t rank_a, Individual const& b, std::size_t rank_b) -> bool;

// Samples k distinct individuals (k capped at the population size) and
// returns the index of the best by Better.
auto TournamentSelect(std::span<Individual const> population, std::span<std::size_t const> ranks, std::size_t k, Rng& rng) -> std::size_t;

// Highest quality valid individual; ties go to lower complexity then lower id.
auto BestIndividual(std::span<Individual const> population) -> Individual const&;

auto Evolve(EvolutionConfig const& config, Evaluator const& evaluator, OperationCatalog const& catalog,
    StructuralConstraints const& constraints, EvolveOptions const& options = {}) -> RunResult;

} // namespace evosa

#endif
