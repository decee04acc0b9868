#include "evosa/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "evosa/error.hpp"
#include "evosa/json_io.hpp"
#include "evosa/variation.hpp"

namespace evosa {

namespace {

    using nlohmann::json;

    void RejectUnknown(json const& doc, std::string const& location, std::set<std::string> const& allowed)
    {
        if (!doc.is_object()) {
            throw ConfigError(fmt::format("{}: expected an object", location));
        }
        for (auto const& [key, value] : doc.items()) {
            if (!allowed.contains(key)) {
                throw ConfigError(fmt::format("{}: unknown key '{}'", location, key));
            }
        }
    }

    template <typename T>
    auto Get(json const& doc, std::string const& key, std::string const& location) -> T
    {
        try {
            return doc.at(key).get<T>();
        } catch (json::exception const&) {
            throw ConfigError(fmt::format("{}.{}: invalid value {}", location, key, doc.at(key).dump()));
        }
    }

    template <typename T>
    void Read(json const& doc, std::string const& key, std::string const& location, T& target)
    {
        if (doc.contains(key)) {
            target = Get<T>(doc, key, location);
        }
    }

    // Non-negative integers; nlohmann would otherwise wrap -1 into a huge size_t.
    void ReadCount(json const& doc, std::string const& key, std::string const& location, std::size_t& target)
    {
        if (!doc.contains(key)) {
            return;
        }
        auto const& v = doc.at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
            throw ConfigError(fmt::format("{}.{}: expected a non-negative integer, got {}", location, key, v.dump()));
        }
        target = v.get<std::size_t>();
    }

    auto Resolve(std::filesystem::path const& base, std::filesystem::path const& p) -> std::filesystem::path
    {
        return p.is_relative() && !base.empty() ? base / p : p;
    }

} // namespace

auto EvolutionConfigFromJson(nlohmann::json const& doc, std::string const& location) -> EvolutionConfig
{
    RejectUnknown(doc, location,
        { "population_size", "max_generations", "timeout_seconds", "mutation_rates", "mutation_probability", "crossover_rate", "elitism",
            "tournament_k", "local_sa", "sa_cadence_K", "sa_top_N", "sa_threshold", "sa_candidate_budget", "global_sa_mode", "rng_seed",
            "jobs", "cache_evaluations" });
    EvolutionConfig config;
    ReadCount(doc, "population_size", location, config.population_size);
    ReadCount(doc, "max_generations", location, config.max_generations);
    Read(doc, "timeout_seconds", location, config.timeout_seconds);
    if (doc.contains("mutation_rates")) {
        auto const& rates = doc.at("mutation_rates");
        auto const where = location + ".mutation_rates";
        if (!rates.is_object()) {
            throw ConfigError(where + ": expected an object");
        }
        for (auto const& [key, value] : rates.items()) {
            auto op = ParseMutationOperator(key);
            if (!op) {
                throw ConfigError(fmt::format("{}: unknown mutation operator '{}'", where, key));
            }
            config.mutation_rates[*op] = Get<double>(rates, key, where);
        }
    }
    Read(doc, "mutation_probability", location, config.mutation_probability);
    Read(doc, "crossover_rate", location, config.crossover_rate);
    ReadCount(doc, "elitism", location, config.elitism);
    ReadCount(doc, "tournament_k", location, config.tournament_k);
    Read(doc, "local_sa", location, config.local_sa);
    ReadCount(doc, "sa_cadence_K", location, config.sa_cadence_K);
    ReadCount(doc, "sa_top_N", location, config.sa_top_N);
    Read(doc, "sa_threshold", location, config.sa_threshold);
    ReadCount(doc, "sa_candidate_budget", location, config.sa_candidate_budget);
    if (doc.contains("global_sa_mode")) {
        auto mode = ParseGlobalSaMode(Get<std::string>(doc, "global_sa_mode", location));
        if (!mode) {
            throw ConfigError(location + ".global_sa_mode: expected off, suitability or metamodel");
        }
        config.global_sa_mode = *mode;
    }
    Read(doc, "rng_seed", location, config.rng_seed);
    Read(doc, "jobs", location, config.jobs);
    Read(doc, "cache_evaluations", location, config.cache_evaluations);
    config.Check();
    return config;
}

auto EvolutionConfigToJson(EvolutionConfig const& config) -> nlohmann::json
{
    json rates = json::object();
    for (auto const& [op, weight] : config.mutation_rates) {
        rates[std::string(ToString(op))] = weight;
    }
    return {
        { "population_size", config.population_size },
        { "max_generations", config.max_generations },
        { "timeout_seconds", config.timeout_seconds },
        { "mutation_rates", rates },
        { "mutation_probability", config.mutation_probability },
        { "crossover_rate", config.crossover_rate },
        { "elitism", config.elitism },
        { "tournament_k", config.tournament_k },
        { "local_sa", config.local_sa },
        { "sa_cadence_K", config.sa_cadence_K },
        { "sa_top_N", config.sa_top_N },
        { "sa_threshold", config.sa_threshold },
        { "sa_candidate_budget", config.sa_candidate_budget },
        { "global_sa_mode", ToString(config.global_sa_mode) },
        { "rng_seed", config.rng_seed },
        { "jobs", config.jobs },
        { "cache_evaluations", config.cache_evaluations },
    };
}

auto ParseRunConfig(std::string_view text, std::filesystem::path const& base_dir) -> RunConfig
{
    json doc;
    try {
        doc = ParseJsonDocument(text);
    } catch (ParseError const& e) {
        throw ConfigError(fmt::format("config is not valid JSON ({}): {}", e.Location(), e.what()));
    }
    RejectUnknown(doc, "$", { "evaluator", "evolution", "constraints", "catalog", "history", "dataset_id", "output_dir", "reports", "bench" });
    RunConfig config;

    if (doc.contains("evaluator")) {
        auto const& ev = doc.at("evaluator");
        RejectUnknown(ev, "evaluator", { "type", "landscape_seed", "dataset", "split_seed" });
        auto const type = ev.contains("type") ? Get<std::string>(ev, "type", "evaluator") : std::string("synthetic");
        if (type == "synthetic") {
            config.evaluator.kind = EvaluatorKind::Synthetic;
        } else if (type == "toy_ml") {
            config.evaluator.kind = EvaluatorKind::ToyMl;
        } else {
            throw ConfigError(fmt::format("evaluator.type: expected synthetic or toy_ml, got '{}'", type));
        }
        Read(ev, "landscape_seed", "evaluator", config.evaluator.landscape_seed);
        Read(ev, "split_seed", "evaluator", config.evaluator.split_seed);
        if (ev.contains("dataset")) {
            auto const& ds = ev.at("dataset");
            RejectUnknown(ds, "evaluator.dataset", { "path", "target", "task" });
            for (char const* key : { "path", "target", "task" }) {
                if (!ds.contains(key)) {
                    throw ConfigError(fmt::format("evaluator.dataset: missing '{}'", key));
                }
            }
            auto task = ParseTask(Get<std::string>(ds, "task", "evaluator.dataset"));
            if (!task) {
                throw ConfigError("evaluator.dataset.task: expected classification or regression");
            }
            config.evaluator.dataset = DatasetManifest {
                Resolve(base_dir, Get<std::string>(ds, "path", "evaluator.dataset")),
                Get<std::string>(ds, "target", "evaluator.dataset"),
                *task,
            };
        }
        if (config.evaluator.kind == EvaluatorKind::ToyMl && !config.evaluator.dataset) {
            throw ConfigError("evaluator: toy_ml needs a dataset manifest {path, target, task}");
        }
    }
    if (doc.contains("evolution")) {
        config.evolution = EvolutionConfigFromJson(doc.at("evolution"));
        config.evolution_given = true;
    }
    if (doc.contains("constraints")) {
        auto const& c = doc.at("constraints");
        RejectUnknown(c, "constraints", { "max_nodes", "max_depth", "max_parents_per_node" });
        ReadCount(c, "max_nodes", "constraints", config.constraints.max_nodes);
        ReadCount(c, "max_depth", "constraints", config.constraints.max_depth);
        ReadCount(c, "max_parents_per_node", "constraints", config.constraints.max_parents_per_node);
        config.constraints.Check();
    }
    if (doc.contains("catalog")) {
        config.catalog_path = Resolve(base_dir, Get<std::string>(doc, "catalog", "$"));
    }
    if (doc.contains("history")) {
        config.history_path = Resolve(base_dir, Get<std::string>(doc, "history", "$"));
    }
    if (doc.contains("dataset_id")) {
        config.dataset_id = Get<std::string>(doc, "dataset_id", "$");
    }
    if (doc.contains("output_dir")) {
        config.output_dir = Resolve(base_dir, Get<std::string>(doc, "output_dir", "$"));
    }
    if (doc.contains("reports")) {
        auto const& r = doc.at("reports");
        RejectUnknown(r, "reports", { "dot", "reproducible" });
        Read(r, "dot", "reports", config.write_dot);
        Read(r, "reproducible", "reports", config.reproducible);
    }
    if (doc.contains("bench")) {
        auto const& b = doc.at("bench");
        RejectUnknown(b, "bench", { "repeats", "landscapes", "arms", "global_mode", "history_records", "history_design" });
        ReadCount(b, "repeats", "bench", config.bench.repeats);
        Read(b, "landscapes", "bench", config.bench.landscapes);
        if (b.contains("arms")) {
            config.bench.arms.clear();
            for (auto const& name : Get<std::vector<std::string>>(b, "arms", "bench")) {
                auto arm = ParseBenchArm(name);
                if (!arm) {
                    throw ConfigError(fmt::format("bench.arms: unknown arm '{}'", name));
                }
                config.bench.arms.push_back(*arm);
            }
        }
        if (b.contains("global_mode")) {
            auto mode = ParseGlobalSaMode(Get<std::string>(b, "global_mode", "bench"));
            if (!mode || *mode == GlobalSaMode::Off) {
                throw ConfigError("bench.global_mode: expected suitability or metamodel");
            }
            config.bench.global_mode = *mode;
        }
        ReadCount(b, "history_records", "bench", config.bench.history_records);
        if (b.contains("history_design")) {
            auto design = ParseHistoryDesign(Get<std::string>(b, "history_design", "bench"));
            if (!design) {
                throw ConfigError("bench.history_design: expected uniform or balanced");
            }
            config.bench.history_design = *design;
        }
    }
    return config;
}

auto LoadRunConfig(std::filesystem::path const& path) -> RunConfig
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return ParseRunConfig(buffer.str(), path.parent_path());
    } catch (ConfigError const& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

auto RunConfigToJson(RunConfig const& config) -> nlohmann::json
{
    json evaluator { { "type", config.evaluator.kind == EvaluatorKind::Synthetic ? "synthetic" : "toy_ml" } };
    if (config.evaluator.kind == EvaluatorKind::Synthetic) {
        evaluator["landscape_seed"] = config.evaluator.landscape_seed;
    } else {
        evaluator["split_seed"] = config.evaluator.split_seed;
    }
    if (config.evaluator.dataset) {
        evaluator["dataset"] = {
            { "path", config.evaluator.dataset->path.generic_string() },
            { "target", config.evaluator.dataset->target },
            { "task", ToString(config.evaluator.dataset->task) },
        };
    }
    json arms = json::array();
    for (auto arm : config.bench.arms) {
        arms.push_back(ToString(arm));
    }
    json doc {
        { "evaluator", evaluator },
        { "evolution", EvolutionConfigToJson(config.evolution) },
        { "constraints",
            { { "max_nodes", config.constraints.max_nodes }, { "max_depth", config.constraints.max_depth },
                { "max_parents_per_node", config.constraints.max_parents_per_node } } },
        { "output_dir", config.output_dir.generic_string() },
        { "reports", { { "dot", config.write_dot }, { "reproducible", config.reproducible } } },
        { "bench",
            { { "repeats", config.bench.repeats }, { "landscapes", config.bench.landscapes }, { "arms", arms },
                { "global_mode", ToString(config.bench.global_mode) }, { "history_records", config.bench.history_records },
                { "history_design", ToString(config.bench.history_design) } } },
    };
    if (config.catalog_path) {
        doc["catalog"] = config.catalog_path->generic_string();
    }
    if (config.history_path) {
        doc["history"] = config.history_path->generic_string();
    }
    if (config.dataset_id) {
        doc["dataset_id"] = *config.dataset_id;
    }
    return doc;
}

auto CatalogFor(RunConfig const& config) -> OperationCatalog
{
    return config.catalog_path ? LoadCatalog(*config.catalog_path) : DefaultCatalog();
}

auto MakeEvaluator(RunConfig const& config, OperationCatalog const& catalog) -> std::shared_ptr<Evaluator const>
{
    if (config.evaluator.kind == EvaluatorKind::Synthetic) {
        return std::make_shared<SyntheticEvaluator>(catalog, config.evaluator.landscape_seed);
    }
    auto const& manifest = *config.evaluator.dataset;
    auto loaded = LoadCsv(manifest.path, manifest.target, manifest.task);
    return std::make_shared<ToyMlEvaluator>(std::move(loaded.dataset), SplitSpec { 0.75, config.evaluator.split_seed }, catalog,
        config.evolution.jobs);
}

auto DatasetIdFor(RunConfig const& config) -> std::string
{
    if (config.dataset_id) {
        return *config.dataset_id;
    }
    if (config.evaluator.kind == EvaluatorKind::Synthetic) {
        return fmt::format("synthetic-{}", config.evaluator.landscape_seed);
    }
    return config.evaluator.dataset->path.stem().string();
}

} // namespace evosa
