#include "evosa/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "evosa/error.hpp"
#include "evosa/meta_model.hpp"
#include "evosa/suitability.hpp"

namespace evosa {

auto ConvergenceCsv(std::span<GenerationStats const> stats, bool fixed_clock) -> std::string
{
    std::string out = "generation,wall_seconds,best_quality,mean_quality,best_complexity\n";
    for (auto const& s : stats) {
        out += fmt::format("{},{:.6f},{:.17g},{:.17g},{}\n", s.generation, fixed_clock ? 0.0 : s.wall_seconds, s.best_quality,
            s.mean_quality, s.best_complexity);
    }
    return out;
}

auto SuggestionTable(std::span<SensitivityRecord const> suggestions) -> std::string
{
    if (suggestions.empty()) {
        return "no simplification improves quality\n";
    }
    std::string out = fmt::format("{:>4}  {:>10}  {:>12}  {:>12}  {}\n", "rank", "S", "Q before", "Q after", "action");
    for (std::size_t i = 0; i < suggestions.size(); ++i) {
        auto const& r = suggestions[i];
        out += fmt::format("{:>4}  {:>10.6f}  {:>12.6f}  {:>12.6f}  {}\n", i + 1, r.index, r.quality_before, r.quality_after, r.Describe());
    }
    return out;
}

auto ToString(BenchArm arm) -> std::string_view
{
    switch (arm) {
    case BenchArm::Plain: return "plain";
    case BenchArm::LocalSa: return "local_sa";
    case BenchArm::GlobalSa: return "global_sa";
    }
    return "plain";
}

auto ParseBenchArm(std::string_view text) -> std::optional<BenchArm>
{
    for (auto arm : { BenchArm::Plain, BenchArm::LocalSa, BenchArm::GlobalSa }) {
        if (text == ToString(arm)) {
            return arm;
        }
    }
    return std::nullopt;
}

auto DefaultBenchSettings() -> BenchSettings
{
    BenchSettings settings;
    settings.base.population_size = 20;
    settings.base.max_generations = 40;
    settings.base.timeout_seconds = 3600.0;
    settings.base.sa_cadence_K = 10;
    settings.base.sa_top_N = 1;
    settings.base.sa_candidate_budget = 1;
    for (std::uint64_t s = 0; s < 30; ++s) {
        settings.seeds.push_back(s);
    }
    return settings;
}

auto Median(std::vector<double> values) -> double
{
    if (values.empty()) {
        return std::nan("");
    }
    std::ranges::sort(values);
    auto const n = values.size();
    return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

auto SampleStdDev(std::span<double const> values) -> double
{
    if (values.size() < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (auto v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (auto v : values) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

auto MedianCurveEvaluationsToTarget(std::span<std::vector<GenerationStats> const> curves, double target) -> std::optional<double>
{
    if (curves.empty()) {
        return std::nullopt;
    }
    auto length = curves.front().size();
    for (auto const& c : curves) {
        length = std::min(length, c.size());
    }
    for (std::size_t g = 0; g < length; ++g) {
        std::vector<double> quality;
        std::vector<double> evaluations;
        for (auto const& c : curves) {
            quality.push_back(c[g].best_quality);
            evaluations.push_back(static_cast<double>(c[g].evaluations));
        }
        if (Median(quality) >= target) {
            return Median(evaluations);
        }
    }
    return std::nullopt;
}

namespace {

    auto StructuralViolations(RunResult const& result, OperationCatalog const& catalog, StructuralConstraints const& constraints) -> std::size_t
    {
        return static_cast<std::size_t>(std::ranges::count_if(result.history, [&](auto const& event) {
            return !Validate(event.pipeline, catalog).Ok() || !SatisfiesConstraints(event.pipeline, constraints);
        }));
    }

    auto MakeAdvisor(BenchDataset const& dataset, std::size_t index, OperationCatalog const& catalog, BenchSettings const& settings,
        std::unique_ptr<MetaModel>& model) -> std::unique_ptr<MutationAdvisor>
    {
        auto history = SampleHistory(*dataset.evaluator, catalog, settings.constraints, settings.history_records,
            MixSeed(settings.history_seed, index), settings.history_design, "warmup", dataset.name);
        if (settings.global_mode == GlobalSaMode::MetaModel) {
            ForestOptions options;
            options.seed = MixSeed(settings.history_seed, index + 0x100);
            options.jobs = settings.base.jobs;
            model = std::make_unique<MetaModel>(FitMetaModel(history, options));
            return std::make_unique<MetaModelAdvisor>(*model);
        }
        return std::make_unique<SuitabilityAdvisor>(BuildSuitabilityTable(history));
    }

} // namespace

auto RunBenchmark(std::span<BenchDataset const> datasets, OperationCatalog const& catalog, BenchSettings const& settings) -> BenchReport
{
    if (settings.seeds.size() < 2) {
        throw ConfigError("benchmark needs at least 2 repeats");
    }
    if (settings.global_mode == GlobalSaMode::Off && std::ranges::find(settings.arms, BenchArm::GlobalSa) != settings.arms.end()) {
        throw ConfigError("global_sa arm needs a global SA mode other than off");
    }
    BenchReport report;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        auto const& dataset = datasets[d];
        std::unique_ptr<MetaModel> model;
        std::unique_ptr<MutationAdvisor> advisor;
        for (auto arm : settings.arms) {
            if (arm == BenchArm::GlobalSa && !advisor) {
                advisor = MakeAdvisor(dataset, d, catalog, settings, model);
            }
            for (auto seed : settings.seeds) {
                auto config = settings.base;
                config.rng_seed = seed;
                config.local_sa = arm == BenchArm::LocalSa;
                config.global_sa_mode = arm == BenchArm::GlobalSa ? settings.global_mode : GlobalSaMode::Off;
                EvolveOptions options;
                options.advisor = arm == BenchArm::GlobalSa ? advisor.get() : nullptr;
                auto result = Evolve(config, *dataset.evaluator, catalog, settings.constraints, options);

                BenchRun run;
                run.dataset = dataset.name;
                run.arm = arm;
                run.seed = seed;
                run.final_quality = result.best.Quality();
                run.final_complexity = result.best.fitness ? result.best.fitness->complexity : 0;
                run.evaluations = result.evaluations;
                run.evaluated_individuals = result.history.size();
                run.structural_violations = StructuralViolations(result, catalog, settings.constraints);
                run.convergence = std::move(result.convergence);
                report.runs.push_back(std::move(run));
            }
        }
    }
    report.summaries = Summarize(report.runs);
    return report;
}

auto Summarize(std::span<BenchRun const> runs) -> std::vector<ArmSummary>
{
    std::vector<std::string> datasets;
    std::map<std::pair<std::string, BenchArm>, std::vector<BenchRun const*>> groups;
    for (auto const& r : runs) {
        if (std::ranges::find(datasets, r.dataset) == datasets.end()) {
            datasets.push_back(r.dataset);
        }
        groups[{ r.dataset, r.arm }].push_back(&r);
    }
    std::vector<ArmSummary> out;
    for (auto const& dataset : datasets) {
        double target = std::nan("");
        if (auto it = groups.find({ dataset, BenchArm::Plain }); it != groups.end()) {
            std::vector<double> finals;
            for (auto const* r : it->second) {
                finals.push_back(r->final_quality);
            }
            target = Median(finals);
        }
        for (auto arm : { BenchArm::Plain, BenchArm::LocalSa, BenchArm::GlobalSa }) {
            auto it = groups.find({ dataset, arm });
            if (it == groups.end()) {
                continue;
            }
            ArmSummary s;
            s.dataset = dataset;
            s.arm = arm;
            s.runs = it->second.size();
            s.target = target;
            std::vector<double> quality;
            std::vector<double> complexity;
            std::vector<double> evaluations;
            std::vector<std::vector<GenerationStats>> curves;
            for (auto const* r : it->second) {
                quality.push_back(r->final_quality);
                complexity.push_back(static_cast<double>(r->final_complexity));
                evaluations.push_back(static_cast<double>(r->evaluations));
                curves.push_back(r->convergence);
            }
            s.median_final_quality = Median(quality);
            s.stddev_final_quality = SampleStdDev(quality);
            s.median_final_complexity = Median(complexity);
            s.median_evaluations = Median(evaluations);
            if (!std::isnan(target)) {
                s.evaluations_to_target = MedianCurveEvaluationsToTarget(curves, target);
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

auto BenchSummaryTable(std::span<ArmSummary const> summaries) -> std::string
{
    std::string out = fmt::format("{:<16} {:<10} {:>5} {:>14} {:>11} {:>12} {:>10} {:>10}\n", "dataset", "arm", "runs",
        "evals_to_target", "complexity", "quality", "sigma", "evals");
    for (auto const& s : summaries) {
        auto ett = s.evaluations_to_target ? fmt::format("{:.0f}", *s.evaluations_to_target) : std::string("not reached");
        out += fmt::format("{:<16} {:<10} {:>5} {:>14} {:>11.1f} {:>12.4f} {:>10.4f} {:>10.0f}\n", s.dataset, ToString(s.arm), s.runs,
            ett, s.median_final_complexity, s.median_final_quality, s.stddev_final_quality, s.median_evaluations);
    }
    return out;
}

auto BenchSummaryCsv(std::span<ArmSummary const> summaries) -> std::string
{
    std::string out = "dataset,arm,runs,target,evaluations_to_target,median_final_complexity,median_final_quality,stddev_final_quality,median_evaluations\n";
    for (auto const& s : summaries) {
        out += fmt::format("{},{},{},{:.17g},{},{},{:.17g},{:.17g},{}\n", s.dataset, ToString(s.arm), s.runs, s.target,
            s.evaluations_to_target ? fmt::format("{}", *s.evaluations_to_target) : std::string(), s.median_final_complexity,
            s.median_final_quality, s.stddev_final_quality, s.median_evaluations);
    }
    return out;
}

auto BenchRunsCsv(std::span<BenchRun const> runs) -> std::string
{
    std::string out = "dataset,arm,seed,final_quality,final_complexity,evaluations,evaluated_individuals,structural_violations\n";
    for (auto const& r : runs) {
        out += fmt::format("{},{},{},{:.17g},{},{},{},{}\n", r.dataset, ToString(r.arm), r.seed, r.final_quality, r.final_complexity,
            r.evaluations, r.evaluated_individuals, r.structural_violations);
    }
    return out;
}

} // namespace evosa
