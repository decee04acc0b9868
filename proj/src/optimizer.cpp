#include "evosa/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "evosa/error.hpp"
#include "evosa/local_sa.hpp"
#include "evosa/search_space.hpp"

namespace evosa {

auto ToString(GlobalSaMode mode) -> std::string_view
{
    switch (mode) {
    case GlobalSaMode::Off: return "off";
    case GlobalSaMode::Suitability: return "suitability";
    case GlobalSaMode::MetaModel: return "metamodel";
    }
    return "off";
}

auto ParseGlobalSaMode(std::string_view text) -> std::optional<GlobalSaMode>
{
    for (auto mode : { GlobalSaMode::Off, GlobalSaMode::Suitability, GlobalSaMode::MetaModel }) {
        if (ToString(mode) == text) {
            return mode;
        }
    }
    return std::nullopt;
}

void EvolutionConfig::Check() const
{
    auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (population_size < 2) {
        throw ConfigError("population_size must be >= 2");
    }
    if (max_generations < 1) {
        throw ConfigError("max_generations must be >= 1");
    }
    if (!(timeout_seconds > 0.0)) {
        throw ConfigError("timeout_seconds must be > 0");
    }
    double total = 0.0;
    for (auto const& [op, w] : mutation_rates) {
        if (!probability(w)) {
            throw ConfigError("mutation rate for " + std::string(ToString(op)) + " must lie in [0, 1]");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw ConfigError("mutation rates must sum to a positive value");
    }
    if (!probability(crossover_rate) || !probability(mutation_probability)) {
        throw ConfigError("crossover_rate and mutation_probability must lie in [0, 1]");
    }
    if (elitism > population_size) {
        throw ConfigError("elitism exceeds population_size");
    }
    if (tournament_k < 1 || sa_cadence_K < 1 || sa_top_N < 1) {
        throw ConfigError("tournament_k, sa_cadence_K and sa_top_N must be >= 1");
    }
}

namespace {

    auto Dominates(Individual const& a, Individual const& b) -> bool
    {
        auto const qa = a.Quality();
        auto const qb = b.Quality();
        auto const ca = a.fitness->complexity;
        auto const cb = b.fitness->complexity;
        return qa >= qb && ca <= cb && (qa > qb || ca < cb);
    }

} // namespace

auto ParetoRanks(std::span<Individual const> population) -> std::vector<std::size_t>
{
    auto const n = population.size();
    std::vector<std::size_t> rank(n, n);
    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < n; ++i) {
        if (population[i].Valid()) {
            remaining.push_back(i);
        }
    }
    std::size_t level = 0;
    while (!remaining.empty()) {
        std::vector<std::size_t> front;
        std::vector<std::size_t> rest;
        for (auto i : remaining) {
            bool dominated = std::ranges::any_of(remaining, [&](auto j) { return j != i && Dominates(population[j], population[i]); });
            (dominated ? rest : front).push_back(i);
        }
        for (auto i : front) {
            rank[i] = level;
        }
        remaining = std::move(rest);
        ++level;
    }
    for (auto& r : rank) {
        r = std::min(r, level);
    }
    return rank;
}

auto ParetoFront(std::span<Individual const> population) -> std::vector<Individual>
{
    auto const ranks = ParetoRanks(population);
    std::vector<Individual> front;
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (population[i].Valid() && ranks[i] == 0) {
            front.push_back(population[i]);
        }
    }
    std::ranges::stable_sort(front, std::greater<> {}, &Individual::Quality);
    return front;
}

auto Better(Individual const& a, std::size_t rank_a, Individual const& b, std::size_t rank_b) -> bool
{
    if (a.Valid() != b.Valid()) {
        return a.Valid();
    }
    if (rank_a != rank_b) {
        return rank_a < rank_b;
    }
    if (a.Quality() != b.Quality()) {
        return a.Quality() > b.Quality();
    }
    auto const ca = a.fitness ? a.fitness->complexity : 0;
    auto const cb = b.fitness ? b.fitness->complexity : 0;
    return ca < cb;
}

auto TournamentSelect(std::span<Individual const> population, std::span<std::size_t const> ranks, std::size_t k, Rng& rng) -> std::size_t
{
    std::vector<std::size_t> pool(population.size());
    std::iota(pool.begin(), pool.end(), 0);
    auto const draws = std::min(std::max<std::size_t>(k, 1), pool.size());
    // partial Fisher-Yates: the first `draws` slots become a uniform sample without replacement
    for (std::size_t i = 0; i < draws; ++i) {
        std::swap(pool[i], pool[i + rng.Index(pool.size() - i)]);
    }
    auto best = pool[0];
    for (std::size_t i = 1; i < draws; ++i) {
        if (Better(population[pool[i]], ranks[pool[i]], population[best], ranks[best])) {
            best = pool[i];
        }
    }
    return best;
}

auto BestIndividual(std::span<Individual const> population) -> Individual const&
{
    if (population.empty()) {
        throw EvolutionError("empty population");
    }
    auto const* best = &population.front();
    for (auto const& ind : population) {
        if (ind.Valid() != best->Valid()) {
            if (ind.Valid()) {
                best = &ind;
            }
            continue;
        }
        if (ind.Quality() > best->Quality()) {
            best = &ind;
        } else if (ind.Quality() == best->Quality() && ind.fitness && best->fitness) {
            auto const ci = ind.fitness->complexity;
            auto const cb = best->fitness->complexity;
            if (ci < cb || (ci == cb && ind.id < best->id)) {
                best = &ind;
            }
        }
    }
    return *best;
}

namespace {

    auto Stats(std::span<Individual const> population, std::size_t generation, double wall, std::size_t evaluations) -> GenerationStats
    {
        GenerationStats s;
        s.generation = generation;
        s.wall_seconds = wall;
        s.evaluations = evaluations;
        double sum = 0.0;
        std::size_t valid = 0;
        for (auto const& ind : population) {
            if (ind.Valid()) {
                sum += ind.Quality();
                ++valid;
            }
        }
        if (valid > 0) {
            auto const& best = BestIndividual(population);
            s.best_quality = best.Quality();
            s.best_complexity = best.fitness->complexity;
            s.mean_quality = sum / static_cast<double>(valid);
        }
        return s;
    }

} // namespace

auto Evolve(EvolutionConfig const& config, Evaluator const& evaluator, OperationCatalog const& catalog,
    StructuralConstraints const& constraints, EvolveOptions const& options) -> RunResult
{
    using Clock = std::chrono::steady_clock;
    config.Check();
    constraints.Check();
    auto const start = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

    CountingEvaluator counting(evaluator);
    std::optional<CachingEvaluator> caching;
    if (config.cache_evaluations) {
        caching.emplace(counting);
    }
    Evaluator const& eval = caching ? static_cast<Evaluator const&>(*caching) : counting;

    LocalSaHook local_sa;
    GenerationHook* hook = options.hook != nullptr ? options.hook : (config.local_sa ? &local_sa : nullptr);

    Rng rng(config.rng_seed);
    std::uint64_t next_id = 0;
    RunResult result;

    auto record = [&](std::size_t generation, Individual const& ind) {
        EvaluationEvent event { generation, ind.id, ind.pipeline, *ind.fitness, ind.lineage.operation, ind.lineage.parents };
        if (options.history != nullptr) {
            options.history->Record(event);
        }
        result.history.push_back(std::move(event));
    };

    auto evaluate = [&](std::span<Individual> batch, std::size_t generation) {
        std::vector<Pipeline> pipelines;
        pipelines.reserve(batch.size());
        for (auto const& ind : batch) {
            pipelines.push_back(ind.pipeline);
        }
        auto reports = EvaluateBatch(pipelines, eval, config.jobs);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            batch[i].fitness = std::move(reports[i]);
            record(generation, batch[i]);
        }
    };

    std::vector<Individual> population;
    population.reserve(config.population_size);
    for (std::size_t i = 0; i < config.population_size; ++i) {
        population.push_back({ next_id++, RandomPipeline(catalog, constraints, rng.Fork()), std::nullopt, { {}, "init" } });
    }
    evaluate(population, 0);
    if (std::ranges::none_of(population, &Individual::Valid)) {
        throw EvolutionError("every individual of generation 0 failed evaluation: " + population.front().fitness->reason);
    }
    result.convergence.push_back(Stats(population, 0, elapsed(), counting.Calls()));

    for (std::size_t generation = 1; generation <= config.max_generations; ++generation) {
        if (elapsed() >= config.timeout_seconds) {
            result.timed_out = true;
            break;
        }
        auto const ranks = ParetoRanks(population);

        std::vector<std::size_t> order(population.size());
        std::iota(order.begin(), order.end(), 0);
        std::ranges::stable_sort(order, [&](auto a, auto b) {
            auto const& x = population[a];
            auto const& y = population[b];
            if (x.Valid() != y.Valid()) {
                return x.Valid();
            }
            if (x.Quality() != y.Quality()) {
                return x.Quality() > y.Quality();
            }
            return x.fitness->complexity < y.fitness->complexity;
        });

        std::vector<Individual> next;
        next.reserve(config.population_size);
        for (std::size_t e = 0; e < config.elitism; ++e) {
            next.push_back(population[order[e]]);
        }

        std::vector<Individual> offspring;
        auto const wanted = config.population_size - next.size();
        while (offspring.size() < wanted) {
            auto const& pa = population[TournamentSelect(population, ranks, config.tournament_k, rng)];
            std::vector<Individual> children;
            if (rng.Bernoulli(config.crossover_rate)) {
                auto const& pb = population[TournamentSelect(population, ranks, config.tournament_k, rng)];
                auto crossed = CrossoverSubtree(pa.pipeline, pb.pipeline, catalog, constraints, rng);
                children.push_back({ 0, std::move(crossed.first), std::nullopt, { { pa.id, pb.id }, "crossover" } });
                children.push_back({ 0, std::move(crossed.second), std::nullopt, { { pb.id, pa.id }, "crossover" } });
            } else {
                children.push_back({ 0, pa.pipeline, std::nullopt, { { pa.id }, "clone" } });
            }
            for (auto& child : children) {
                if (offspring.size() >= wanted) {
                    break;
                }
                if (rng.Bernoulli(config.mutation_probability)) {
                    auto mutated = Mutate(child.pipeline, catalog, constraints, config.mutation_rates, rng, options.advisor);
                    if (mutated.applied) {
                        child.pipeline = std::move(mutated.pipeline);
                        child.lineage.operation += "+" + std::string(ToString(*mutated.applied));
                    }
                }
                child.id = next_id++;
                offspring.push_back(std::move(child));
            }
        }
        evaluate(offspring, generation);
        for (auto& child : offspring) {
            next.push_back(std::move(child));
        }
        population = std::move(next);

        if (hook != nullptr) {
            GenerationContext context { generation, config, eval, catalog, constraints, rng, next_id };
            for (auto i : hook->Apply(population, context)) {
                record(generation, population[i]);
            }
        }
        result.convergence.push_back(Stats(population, generation, elapsed(), counting.Calls()));
    }

    result.best = BestIndividual(population);
    result.pareto_front = ParetoFront(population);
    result.population = std::move(population);
    result.evaluations = counting.Calls();
    return result;
}

} // namespace evosa
