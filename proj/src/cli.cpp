#include "evosa/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "evosa/dot.hpp"
#include "evosa/error.hpp"
#include "evosa/history.hpp"
#include "evosa/json_io.hpp"
#include "evosa/local_sa.hpp"
#include "evosa/meta_model.hpp"
#include "evosa/reporting.hpp"
#include "evosa/run_config.hpp"
#include "evosa/suitability.hpp"

namespace evosa::cli {

namespace {

    namespace fs = std::filesystem;

    // Flags shared by every subcommand; unset ones leave the config alone.
    struct Overrides {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::optional<int> jobs;
        std::string out;
        std::optional<double> timeout_seconds;
        std::string global_sa;
        std::optional<std::size_t> sa_cadence;
        std::optional<std::size_t> sa_top_n;
        std::string history;
        bool local_sa { false };
        bool reproducible { false };
    };

    auto ReadText(fs::path const& path, std::string_view what) -> std::string
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw DataError(fmt::format("cannot open {} {}", what, path.string()));
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    }

    void WriteText(fs::path const& path, std::string_view text)
    {
        if (path.has_parent_path()) {
            std::error_code ec;
            fs::create_directories(path.parent_path(), ec);
            if (ec) {
                throw DataError(fmt::format("cannot create directory {}: {}", path.parent_path().string(), ec.message()));
            }
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError(fmt::format("cannot write {}", path.string()));
        }
        out << text;
        if (!out) {
            throw DataError(fmt::format("failed writing {}", path.string()));
        }
    }

    auto BuildConfig(Overrides const& o) -> RunConfig
    {
        auto config = o.config.empty() ? RunConfig {} : LoadRunConfig(o.config);
        if (o.seed) {
            config.evolution.rng_seed = *o.seed;
        }
        if (o.jobs) {
            config.evolution.jobs = *o.jobs;
        }
        if (!o.out.empty()) {
            config.output_dir = o.out;
        }
        if (o.timeout_seconds) {
            config.evolution.timeout_seconds = *o.timeout_seconds;
        }
        if (!o.global_sa.empty()) {
            auto mode = ParseGlobalSaMode(o.global_sa);
            if (!mode) {
                throw ConfigError(fmt::format("--global-sa: expected off, suitability or metamodel, got '{}'", o.global_sa));
            }
            config.evolution.global_sa_mode = *mode;
        }
        if (o.sa_cadence) {
            config.evolution.sa_cadence_K = *o.sa_cadence;
        }
        if (o.sa_top_n) {
            config.evolution.sa_top_N = *o.sa_top_n;
        }
        if (o.local_sa) {
            config.evolution.local_sa = true;
        }
        if (!o.history.empty()) {
            config.history_path = o.history;
        }
        if (o.reproducible) {
            config.reproducible = true;
        }
        config.evolution.Check();
        return config;
    }

    auto LoadPipelineFile(fs::path const& path) -> Pipeline
    {
        auto text = ReadText(path, "pipeline file");
        try {
            return Deserialize(text);
        } catch (ParseError const& e) {
            throw ParseError(fmt::format("{}: {}", path.string(), e.what()), e.Location());
        }
    }

    auto LoadHistoryFile(fs::path const& path, std::ostream& err) -> std::vector<HistoryRecord>
    {
        auto load = HistoryStore(path).Load();
        for (auto const& w : load.warnings) {
            err << "warning: " << path.string() << ": " << w << '\n';
        }
        return std::move(load.records);
    }

    auto FitnessSummary(FitnessReport const& f) -> nlohmann::json
    {
        auto doc = FitnessToJson(f);
        doc.erase("train_seconds");
        doc.erase("inference_seconds");
        return doc;
    }

    auto CmdEvolve(Overrides const& o, std::ostream& out, std::ostream& err) -> int
    {
        auto config = BuildConfig(o);
        auto catalog = CatalogFor(config);
        auto evaluator = MakeEvaluator(config, catalog);
        auto const dataset_id = DatasetIdFor(config);
        auto const history_path = config.history_path.value_or(config.output_dir / "history.jsonl");

        std::unique_ptr<MetaModel> model;
        std::unique_ptr<MutationAdvisor> advisor;
        if (config.evolution.global_sa_mode != GlobalSaMode::Off) {
            if (!fs::exists(history_path)) {
                throw ConfigError(fmt::format("global SA needs a history file, {} does not exist", history_path.string()));
            }
            auto records = LoadHistoryFile(history_path, err);
            if (records.empty()) {
                throw ConfigError(fmt::format("history file {} has no usable records", history_path.string()));
            }
            if (config.evolution.global_sa_mode == GlobalSaMode::Suitability) {
                advisor = std::make_unique<SuitabilityAdvisor>(BuildSuitabilityTable(records));
            } else {
                ForestOptions forest;
                forest.seed = config.evolution.rng_seed;
                forest.jobs = config.evolution.jobs;
                model = std::make_unique<MetaModel>(FitMetaModel(records, forest));
                advisor = std::make_unique<MetaModelAdvisor>(*model);
            }
        }

        auto const run_id = config.reproducible ? fmt::format("seed{}", config.evolution.rng_seed)
                                                : fmt::format("seed{}-{}", config.evolution.rng_seed, CurrentTimestamp());
        HistoryRecorder recorder(run_id, dataset_id, config.reproducible ? std::string() : CurrentTimestamp());
        EvolveOptions options;
        options.history = &recorder;
        options.advisor = advisor.get();
        auto result = Evolve(config.evolution, *evaluator, catalog, config.constraints, options);

        auto const& dir = config.output_dir;
        WriteText(dir / "best_pipeline.json", Serialize(result.best.pipeline));
        WriteText(dir / "convergence.csv", ConvergenceCsv(result.convergence, config.reproducible));
        std::error_code ec;
        fs::remove_all(dir / "pareto", ec);
        for (std::size_t i = 0; i < result.pareto_front.size(); ++i) {
            auto const& ind = result.pareto_front[i];
            nlohmann::json doc { { "pipeline", PipelineToJson(ind.pipeline) }, { "fitness", FitnessSummary(*ind.fitness) } };
            WriteText(dir / "pareto" / fmt::format("front_{:02}.json", i), doc.dump(2) + "\n");
        }
        if (config.write_dot) {
            WriteText(dir / "best_pipeline.dot", ToDot(result.best.pipeline));
        }
        nlohmann::json summary {
            { "run_id", run_id },
            { "dataset_id", dataset_id },
            { "evaluator", evaluator->Name() },
            { "best_fitness", FitnessSummary(*result.best.fitness) },
            { "generations", result.convergence.empty() ? 0 : result.convergence.back().generation },
            { "evaluations", result.evaluations },
            { "pareto_size", result.pareto_front.size() },
            { "timed_out", result.timed_out },
            { "config", RunConfigToJson(config) },
        };
        WriteText(dir / "run_summary.json", summary.dump(2) + "\n");
        std::string events;
        for (auto const& e : result.history) {
            nlohmann::json line {
                { "generation", e.generation },
                { "id", e.individual_id },
                { "pipeline", PipelineToJson(e.pipeline) },
                { "fitness", FitnessSummary(e.fitness) },
                { "operator", e.operation },
                { "parents", e.parents },
            };
            events += line.dump() + "\n";
        }
        WriteText(dir / "events.jsonl", events);
        auto records = recorder.Records();
        HistoryStore(history_path).Append(records);

        out << fmt::format("best quality {:.6f} with {} nodes after {} generations ({} evaluator calls{})\n",
            result.best.Quality(), result.best.fitness->complexity, summary["generations"].get<std::size_t>(), result.evaluations,
            result.timed_out ? ", timed out" : "");
        out << "best pipeline: " << (dir / "best_pipeline.json").string() << '\n';
        out << fmt::format("appended {} records to {}\n", records.size(), history_path.string());
        return kExitOk;
    }

    auto CmdAnalyze(Overrides const& o, std::string const& pipeline_file, std::size_t budget, double threshold, bool simplify,
        std::ostream& out) -> int
    {
        auto config = BuildConfig(o);
        auto catalog = CatalogFor(config);
        auto pipeline = LoadPipelineFile(pipeline_file);
        if (auto result = Validate(pipeline, catalog); !result.Ok()) {
            throw StructuralError(fmt::format("{} is not a valid pipeline: {}", pipeline_file, result.Describe()));
        }
        auto evaluator = MakeEvaluator(config, catalog);
        SweepOptions options;
        options.candidate_budget = budget;
        options.seed = config.evolution.rng_seed;
        options.jobs = config.evolution.jobs;
        options.per_metric = true;
        auto report = FullSweep(pipeline, *evaluator, catalog, options);

        auto const& dir = config.output_dir;
        WriteText(dir / "sa_report.json", SerializeReport(report));
        WriteText(dir / "pipeline_sa.dot", ToDot(pipeline, report));
        out << fmt::format("baseline quality {:.6f}, {} records, {} evaluator calls\n", report.baseline.quality, report.records.size(),
            report.evaluations);
        auto suggestions = RankedSuggestions(report);
        out << SuggestionTable(suggestions);
        if (simplify) {
            auto simplified = ApplySimplifications(pipeline, report, *evaluator, catalog, threshold, options);
            WriteText(dir / "simplified_pipeline.json", Serialize(simplified.pipeline));
            out << fmt::format("simplified: {} edits applied, quality {:.6f} -> {:.6f}, nodes {} -> {}\n", simplified.applied.size(),
                report.baseline.quality, simplified.fitness.quality, pipeline.Size(), simplified.pipeline.Size());
        }
        out << "report: " << (dir / "sa_report.json").string() << '\n';
        return kExitOk;
    }

    auto CmdSuggest(Overrides const& o, std::vector<std::string> const& parents, std::vector<std::string> const& children,
        std::vector<std::string> candidates, bool sink, std::ostream& out, std::ostream& err) -> int
    {
        auto config = BuildConfig(o);
        if (!config.history_path) {
            throw ConfigError("suggest needs --history or a config with a history path");
        }
        auto records = LoadHistoryFile(*config.history_path, err);
        if (records.empty()) {
            throw DataError(fmt::format("history file {} has no usable records", config.history_path->string()));
        }
        auto table = BuildSuitabilityTable(records);
        if (!o.out.empty()) {
            WriteText(config.output_dir / "suitability.json", table.ToJson().dump(2) + "\n");
        }
        out << fmt::format("suitability table from {} records ({} datasets)\n", records.size(), DatasetIds(records).size());
        out << table.Grid();
        if (parents.empty() && children.empty()) {
            return kExitOk;
        }
        if (candidates.empty()) {
            auto catalog = CatalogFor(config);
            candidates = sink ? catalog.SinkNames() : catalog.Names();
        }
        auto const scores = DirectedScores(parents, children, candidates, table);
        auto const probabilities = DirectedProbabilities(parents, children, candidates, table);
        std::vector<std::size_t> order(candidates.size());
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        std::ranges::stable_sort(order, [&](auto a, auto b) { return probabilities[a] > probabilities[b]; });
        out << fmt::format("\ncandidates for parents [{}] and children [{}]\n", fmt::join(parents, ", "), fmt::join(children, ", "));
        out << fmt::format("{:<16} {:>8} {:>12}\n", "operation", "score", "probability");
        for (auto i : order) {
            out << fmt::format("{:<16} {:>8.4f} {:>12.4f}\n", candidates[i], scores[i], probabilities[i]);
        }
        return kExitOk;
    }

    auto CmdBench(Overrides const& o, std::optional<std::size_t> repeats, std::ostream& out) -> int
    {
        auto config = BuildConfig(o);
        auto catalog = CatalogFor(config);
        auto settings = DefaultBenchSettings();
        if (config.evolution_given) {
            settings.base = config.evolution;
        }
        if (o.jobs) {
            settings.base.jobs = *o.jobs;
        }
        if (o.timeout_seconds) {
            settings.base.timeout_seconds = *o.timeout_seconds;
        }
        if (o.sa_cadence) {
            settings.base.sa_cadence_K = *o.sa_cadence;
        }
        if (o.sa_top_n) {
            settings.base.sa_top_N = *o.sa_top_n;
        }
        settings.constraints = config.constraints;
        settings.arms = config.bench.arms;
        settings.global_mode = config.bench.global_mode;
        if (!o.global_sa.empty()) {
            if (config.evolution.global_sa_mode == GlobalSaMode::Off) {
                std::erase(settings.arms, BenchArm::GlobalSa);
            } else {
                settings.global_mode = config.evolution.global_sa_mode;
            }
        }
        settings.history_records = config.bench.history_records;
        settings.history_design = config.bench.history_design;
        auto const n = repeats.value_or(config.bench.repeats);
        if (n < 2) {
            throw ConfigError(fmt::format("bench needs at least 2 repeats, got {}", n));
        }
        auto const seed_base = o.seed.value_or(0);
        settings.seeds.clear();
        for (std::size_t i = 0; i < n; ++i) {
            settings.seeds.push_back(seed_base + i);
        }
        settings.history_seed = MixSeed(seed_base, 0xB0);

        std::vector<BenchDataset> datasets;
        if (config.evaluator.kind == EvaluatorKind::Synthetic) {
            for (auto landscape : config.bench.landscapes) {
                datasets.push_back({ fmt::format("synthetic-{}", landscape), std::make_shared<SyntheticEvaluator>(catalog, landscape) });
            }
        } else {
            datasets.push_back({ DatasetIdFor(config), MakeEvaluator(config, catalog) });
        }
        auto report = RunBenchmark(datasets, catalog, settings);
        WriteText(config.output_dir / "bench_summary.csv", BenchSummaryCsv(report.summaries));
        WriteText(config.output_dir / "bench_runs.csv", BenchRunsCsv(report.runs));
        out << BenchSummaryTable(report.summaries);
        std::size_t violations = 0;
        for (auto const& r : report.runs) {
            violations += r.structural_violations;
        }
        out << fmt::format("{} runs, {} structurally invalid evaluated pipelines\n", report.runs.size(), violations);
        return kExitOk;
    }

    auto CmdHistoryList(Overrides const& o, std::ostream& out, std::ostream& err) -> int
    {
        auto config = BuildConfig(o);
        if (!config.history_path) {
            throw ConfigError("history list needs --history or a config with a history path");
        }
        auto records = LoadHistoryFile(*config.history_path, err);
        out << fmt::format("{:<40} {:<24} {:>8} {:>14}\n", "run_id", "dataset_id", "records", "best_fitness");
        for (auto const& run : RunIds(records)) {
            auto subset = QueryHistory(records, std::nullopt, run);
            for (auto const& dataset : DatasetIds(subset)) {
                auto rows = QueryHistory(subset, dataset);
                auto best = std::ranges::max(rows, {}, &HistoryRecord::fitness).fitness;
                out << fmt::format("{:<40} {:<24} {:>8} {:>14.6f}\n", run, dataset, rows.size(), best);
            }
        }
        out << fmt::format("{} records\n", records.size());
        return kExitOk;
    }

    auto CmdHistoryInspect(Overrides const& o, std::string const& run, std::string const& dataset, std::size_t limit, std::ostream& out,
        std::ostream& err) -> int
    {
        auto config = BuildConfig(o);
        if (!config.history_path) {
            throw ConfigError("history inspect needs --history or a config with a history path");
        }
        auto records = LoadHistoryFile(*config.history_path, err);
        auto rows = QueryHistory(records, dataset.empty() ? std::nullopt : std::optional<std::string_view>(dataset),
            run.empty() ? std::nullopt : std::optional<std::string_view>(run));
        std::ranges::stable_sort(rows, std::greater<> {}, &HistoryRecord::fitness);
        auto const ranks = NormalizedRanksByDataset(rows);
        out << fmt::format("{} matching records\n", rows.size());
        for (std::size_t i = 0; i < rows.size() && i < limit; ++i) {
            auto const& r = rows[i];
            out << fmt::format("{:>4}  fitness {:.6f}  Rn {:.3f}  nodes {}  {}\n", i + 1, r.fitness, ranks[i], r.pipeline.Size(),
                PipelineToJson(r.pipeline).dump());
        }
        return kExitOk;
    }

    auto AnnotationsFromReportFile(fs::path const& path) -> DotAnnotations
    {
        auto doc = ParseJsonDocument(ReadText(path, "report file"));
        DotAnnotations annotations;
        if (!doc.contains("records") || !doc.at("records").is_array()) {
            throw ParseError(fmt::format("{}: no records array", path.string()), "$.records");
        }
        for (auto const& r : doc.at("records")) {
            if (!r.value("feasible", false) || r.value("action", "") != "delete") {
                continue;
            }
            auto const index = r.at("index").get<double>();
            if (r.value("target", "") == "node") {
                annotations.node_index[r.at("node").get<std::string>()] = index;
            } else {
                auto const& e = r.at("edge");
                annotations.edge_index[Edge { e.at(0).get<std::string>(), e.at(1).get<std::string>() }] = index;
            }
        }
        return annotations;
    }

    auto CmdExportDot(Overrides const& o, std::string const& pipeline_file, std::string const& report_file, std::ostream& out) -> int
    {
        auto pipeline = LoadPipelineFile(pipeline_file);
        std::optional<DotAnnotations> annotations;
        if (!report_file.empty()) {
            annotations = AnnotationsFromReportFile(report_file);
        }
        auto dot = ToDot(pipeline, annotations ? &*annotations : nullptr);
        if (o.out.empty()) {
            out << dot;
        } else {
            WriteText(o.out, dot);
        }
        return kExitOk;
    }

    void AddCommonFlags(CLI::App& app, Overrides& o)
    {
        app.add_option("--config", o.config, "JSON run configuration");
        app.add_option("--seed", o.seed, "random seed (overrides config)");
        app.add_option("--jobs", o.jobs, "worker threads; 1 = serial, 0 = all cores");
        app.add_option("--out", o.out, "output directory (export-dot: output file)");
        app.add_option("--timeout-seconds", o.timeout_seconds, "wall-clock budget for evolution");
        app.add_option("--global-sa", o.global_sa, "off | suitability | metamodel");
        app.add_option("--sa-cadence", o.sa_cadence, "run local SA every K generations");
        app.add_option("--sa-top-n", o.sa_top_n, "local SA on the N best individuals");
        app.add_option("--history", o.history, "history file (line-delimited JSON)");
        app.add_flag("--local-sa", o.local_sa, "enable local SA during evolution");
        app.add_flag("--reproducible", o.reproducible, "write fixed timing columns and run ids");
    }

} // namespace

auto Run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err) -> int
{
    CLI::App app { "Evolutionary pipeline search with sensitivity analysis", "evosa" };
    app.require_subcommand(1);
    app.set_version_flag("--version", "evosa 0.1.0");

    Overrides o;
    std::string pipeline_file;
    std::string report_file;
    std::string run_filter;
    std::string dataset_filter;
    std::size_t inspect_limit = 20;
    std::size_t budget = 3;
    double threshold = 0.0;
    bool simplify = false;
    std::vector<std::string> parents;
    std::vector<std::string> children;
    std::vector<std::string> candidates;
    bool sink = false;
    std::optional<std::size_t> repeats;

    auto* evolve = app.add_subcommand("evolve", "run evolution and write best/pareto/convergence artifacts");
    AddCommonFlags(*evolve, o);

    auto* analyze = app.add_subcommand("analyze", "sensitivity sweep over one pipeline");
    AddCommonFlags(*analyze, o);
    analyze->add_option("pipeline", pipeline_file, "pipeline JSON file")->required();
    analyze->add_option("--budget", budget, "replacement candidates per node and per edge");
    analyze->add_option("--threshold", threshold, "minimum index for --simplify");
    analyze->add_flag("--simplify", simplify, "apply improving edits and write the simplified pipeline");

    auto* suggest = app.add_subcommand("suggest", "suitability table and directed candidates from history");
    AddCommonFlags(*suggest, o);
    suggest->add_option("--parent", parents, "parent operation of the site (repeatable)");
    suggest->add_option("--child", children, "child operation of the site (repeatable)");
    suggest->add_option("--candidates", candidates, "candidate operations (default: catalog)")->delimiter(',');
    suggest->add_flag("--sink", sink, "the site is the sink; restrict default candidates to models");

    auto* bench = app.add_subcommand("bench", "paired plain / local SA / global SA benchmark");
    AddCommonFlags(*bench, o);
    bench->add_option("--repeats", repeats, "seeds per arm and dataset (>= 2)");

    auto* history = app.add_subcommand("history", "inspect a history file");
    history->require_subcommand(1);
    auto* list = history->add_subcommand("list", "runs and datasets in the history");
    AddCommonFlags(*list, o);
    auto* inspect = history->add_subcommand("inspect", "records of one run or dataset, best first");
    AddCommonFlags(*inspect, o);
    inspect->add_option("--run", run_filter, "run id");
    inspect->add_option("--dataset", dataset_filter, "dataset id");
    inspect->add_option("--limit", inspect_limit, "records to print");

    auto* export_dot = app.add_subcommand("export-dot", "Graphviz DOT for a pipeline, optionally SA-annotated");
    AddCommonFlags(*export_dot, o);
    export_dot->add_option("pipeline", pipeline_file, "pipeline JSON file")->required();
    export_dot->add_option("--report", report_file, "SA report JSON from analyze");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return kExitOk;
    } catch (CLI::CallForAllHelp const&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (CLI::CallForVersion const&) {
        out << "evosa 0.1.0\n";
        return kExitOk;
    } catch (CLI::ParseError const& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*evolve) {
            return CmdEvolve(o, out, err);
        }
        if (*analyze) {
            return CmdAnalyze(o, pipeline_file, budget, threshold, simplify, out);
        }
        if (*suggest) {
            return CmdSuggest(o, parents, children, candidates, sink, out, err);
        }
        if (*bench) {
            return CmdBench(o, repeats, out);
        }
        if (*list) {
            return CmdHistoryList(o, out, err);
        }
        if (*inspect) {
            return CmdHistoryInspect(o, run_filter, dataset_filter, inspect_limit, out, err);
        }
        if (*export_dot) {
            return CmdExportDot(o, pipeline_file, report_file, out);
        }
    } catch (ConfigError const& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (DataError const& e) {
        err << "data error: " << e.what() << '\n';
        return kExitUsage;
    } catch (ParseError const& e) {
        err << "parse error at " << e.Location() << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (StructuralError const& e) {
        err << "invalid pipeline: " << e.what() << '\n';
        return kExitUsage;
    } catch (TrainingError const& e) {
        err << "training error: " << e.what() << '\n';
        return kExitUsage;
    } catch (std::exception const& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

auto Run(int argc, char const* const* argv) -> int
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return Run(args, std::cout, std::cerr);
}

} // namespace evosa::cli
