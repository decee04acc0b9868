// Runs the ten acceptance checks and prints one PASS/FAIL line for each.
// Exit status is nonzero when any check fails.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "evosa/cli.hpp"
#include "evosa/dataset.hpp"
#include "evosa/evaluator.hpp"
#include "evosa/json_io.hpp"
#include "evosa/local_sa.hpp"
#include "evosa/meta_model.hpp"
#include "evosa/reporting.hpp"
#include "evosa/sampling.hpp"
#include "evosa/search_space.hpp"
#include "evosa/suitability.hpp"
#include "constructions.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace evosa;

namespace {

using Clock = std::chrono::steady_clock;

auto Seconds(Clock::time_point since) -> double
{
    return std::chrono::duration<double>(Clock::now() - since).count();
}

// Passes calls through and counts pipelines that fail validation.
class Checker final : public Evaluator {
public:
    Checker(Evaluator const& inner, OperationCatalog catalog) : inner_(inner), catalog_(std::move(catalog)) { }

    [[nodiscard]] auto Evaluate(Pipeline const& p) const -> FitnessReport override
    {
        evaluated_.fetch_add(1);
        if (!Validate(p, catalog_).Ok()) {
            invalid_.fetch_add(1);
        }
        return inner_.Evaluate(p);
    }
    [[nodiscard]] auto Name() const -> std::string override { return inner_.Name(); }

    static auto Evaluated() -> std::size_t { return evaluated_.load(); }
    static auto Invalid() -> std::size_t { return invalid_.load(); }

private:
    Evaluator const& inner_;
    OperationCatalog catalog_;
    static inline std::atomic<std::size_t> evaluated_ { 0 };
    static inline std::atomic<std::size_t> invalid_ { 0 };
};

// Owns its evaluator so it can sit in a shared_ptr for the benchmark.
class OwningChecker final : public Evaluator {
public:
    OwningChecker(OperationCatalog const& catalog, std::uint64_t landscape)
        : inner_(catalog, landscape)
        , check_(inner_, catalog)
    {
    }
    [[nodiscard]] auto Evaluate(Pipeline const& p) const -> FitnessReport override { return check_.Evaluate(p); }
    [[nodiscard]] auto Name() const -> std::string override { return inner_.Name(); }

private:
    SyntheticEvaluator inner_;
    Checker check_;
};

std::size_t g_failures = 0;
std::size_t g_extra_invalid = 0; // found outside the Checker (bench constraints, CLI events)

void Report(int id, bool pass, std::string const& detail)
{
    fmt::print("{} {} {}\n", pass ? "PASS" : "FAIL", id, detail);
    std::fflush(stdout);
    g_failures += pass ? 0 : 1;
}

auto ChiSquareP(std::vector<double> const& observed) -> double
{
    double total = 0.0;
    for (double o : observed) {
        total += o;
    }
    double const expected = total / static_cast<double>(observed.size());
    double stat = 0.0;
    for (double o : observed) {
        stat += (o - expected) * (o - expected) / expected;
    }
    boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

void SensitivityOracle(OperationCatalog const& catalog)
{
    auto const start = Clock::now();
    std::size_t feasible = 0;
    std::size_t mismatches = 0;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        auto const landscape = 1 + i % 10;
        SyntheticEvaluator inner(catalog, landscape);
        Checker eval(inner, catalog);
        oracle::Landscape truth(catalog.Names(), landscape);
        auto p = RandomPipeline(catalog, {}, 1000 + i);
        SweepOptions options;
        options.seed = i;
        auto report = FullSweep(p, eval, catalog, options);
        double const before = truth.Quality(p);
        for (auto const& r : report.records) {
            if (!r.feasible) {
                continue;
            }
            ++feasible;
            double const expected = oracle::Sensitivity(before, truth.Quality(ApplyRecord(p, r, catalog)));
            double const diff = std::abs(r.index - expected);
            worst = std::max(worst, diff);
            mismatches += diff < 1e-12 ? 0 : 1;
        }
    }
    double const elapsed = Seconds(start);
    Report(1, mismatches == 0 && feasible > 0 && elapsed < 30.0,
        fmt::format("sensitivity oracle: 200 pipelines, {} feasible records, max |dS| {:.3g}, {} mismatches, {:.1f} s",
            feasible, worst, mismatches, elapsed));
}

void SimplificationSoundness(OperationCatalog const& catalog)
{
    auto const start = Clock::now();
    std::size_t decreases = 0;
    std::size_t improved = 0;
    std::size_t cases = 0;
    auto check = [&](Evaluator const& eval, Pipeline const& p, std::uint64_t seed) {
        SweepOptions options;
        options.seed = seed;
        auto report = FullSweep(p, eval, catalog, options);
        auto result = ApplySimplifications(p, report, eval, catalog, 0.0, options);
        double const before = report.baseline.quality;
        double const after = eval.Evaluate(result.pipeline).quality;
        decreases += (after < before || result.fitness.quality != after || !Validate(result.pipeline, catalog).Ok()) ? 1 : 0;
        improved += after > before ? 1 : 0;
        ++cases;
    };
    for (std::uint64_t i = 0; i < 950; ++i) {
        SyntheticEvaluator inner(catalog, 100 + i % 50);
        Checker eval(inner, catalog);
        check(eval, RandomPipeline(catalog, {}, 5000 + i), i);
    }
    ToyMlEvaluator regression(MakeLinearRegression(21, 120, 4, 0.5), { 0.75, 1 }, catalog);
    ToyMlEvaluator classification(MakeSeparableClassification(22, 120, 3), { 0.75, 2 }, catalog);
    Checker reg(regression, catalog);
    Checker cls(classification, catalog);
    for (std::uint64_t i = 0; i < 50; ++i) {
        check(i % 2 == 0 ? static_cast<Evaluator const&>(reg) : cls, RandomPipeline(catalog, { 5, 4, 2 }, 9000 + i), i);
    }
    Report(2, decreases == 0 && cases == 1000,
        fmt::format("simplification soundness: {} cases (950 synthetic, 50 toy-ml), {} quality decreases, {} improved, {:.1f} s",
            cases, decreases, improved, Seconds(start)));
}

void Benchmark(OperationCatalog const& catalog)
{
    auto const start = Clock::now();
    auto settings = DefaultBenchSettings();
    std::vector<BenchDataset> datasets;
    for (std::uint64_t landscape : { 1, 2, 3 }) {
        datasets.push_back({ fmt::format("synthetic-{}", landscape), std::make_shared<OwningChecker>(catalog, landscape) });
    }
    auto report = RunBenchmark(datasets, catalog, settings);
    double const elapsed = Seconds(start);

    for (auto const& run : report.runs) {
        g_extra_invalid += run.structural_violations;
    }
    std::map<std::pair<std::string, BenchArm>, ArmSummary> by;
    for (auto const& s : report.summaries) {
        by[{ s.dataset, s.arm }] = s;
    }
    bool speed = true;
    bool simpler = true;
    std::size_t stable = 0;
    std::string speed_detail;
    std::string complexity_detail;
    std::string sigma_detail;
    for (auto const& d : datasets) {
        auto const& plain = by.at({ d.name, BenchArm::Plain });
        auto const& sa = by.at({ d.name, BenchArm::LocalSa });
        double ratio = std::nan("");
        if (plain.evaluations_to_target && sa.evaluations_to_target) {
            ratio = *sa.evaluations_to_target / *plain.evaluations_to_target;
        }
        speed = speed && ratio <= 0.9;
        simpler = simpler && sa.median_final_complexity < plain.median_final_complexity;
        stable += sa.stddev_final_quality <= plain.stddev_final_quality ? 1 : 0;
        speed_detail += fmt::format(" {}={:.3f}", d.name, ratio);
        complexity_detail += fmt::format(" {}={}/{}", d.name, sa.median_final_complexity, plain.median_final_complexity);
        sigma_detail += fmt::format(" {}={:.3f}/{:.3f}", d.name, sa.stddev_final_quality, plain.stddev_final_quality);
    }
    fmt::print("{}", BenchSummaryTable(report.summaries));
    Report(3, speed && simpler && elapsed < 600.0,
        fmt::format("convergence: evaluations ratio sa/plain (<= 0.9){}; median complexity sa/plain (strictly lower){}; {:.1f} s",
            speed_detail, complexity_detail, elapsed));
    Report(4, stable >= 2, fmt::format("stability: sd of final quality sa/plain{}; {} of 3 landscapes not worse", sigma_detail, stable));
}

void SuitabilityRecovery(OperationCatalog const& catalog)
{
    auto const start = Clock::now();
    auto median_spearman = [&](HistoryDesign design) {
        std::vector<double> rho;
        for (std::uint64_t landscape = 1; landscape <= 30; ++landscape) {
            SyntheticEvaluator inner(catalog, landscape);
            Checker eval(inner, catalog);
            auto history = SampleHistory(eval, catalog, {}, 500, landscape, design, "recovery", "synthetic");
            auto table = BuildSuitabilityTable(history);
            std::vector<double> bonus;
            std::vector<double> suit;
            for (auto const& [pair, cell] : table.Cells()) {
                bonus.push_back(inner.EdgeBonus(pair.first, pair.second));
                suit.push_back(cell.value);
            }
            rho.push_back(oracle::Spearman(bonus, suit));
        }
        std::ranges::sort(rho);
        return std::pair { Median(rho), rho.front() };
    };
    auto [balanced, balanced_min] = median_spearman(HistoryDesign::Balanced);
    auto [uniform, uniform_min] = median_spearman(HistoryDesign::Uniform);
    Report(5, balanced >= 0.6,
        fmt::format("suitability recovery: median Spearman {:.3f} (min {:.3f}) over 30 landscapes, 500-record balanced histories; "
                    "uniform-design histories {:.3f} for reference; {:.1f} s",
            balanced, balanced_min, uniform, Seconds(start)));
}

// Alg. 1 weights written out: neutral 0.5 for absent cells, negatives
// dropped, uniform over everything when the best score is below 0.1.
auto ExpectedWeights(std::vector<std::string> const& parents, std::vector<std::string> const& children,
    std::vector<std::string> const& candidates, std::map<std::pair<std::string, std::string>, double> const& cells) -> std::vector<double>
{
    auto cell = [&](std::string const& a, std::string const& b) {
        auto it = cells.find({ a, b });
        return it == cells.end() ? 0.5 : it->second;
    };
    std::vector<double> score;
    for (auto const& c : candidates) {
        double s = 0.0;
        for (auto const& p : parents) {
            s += cell(p, c);
        }
        for (auto const& ch : children) {
            s += cell(c, ch);
        }
        score.push_back(s);
    }
    std::vector<double> w(candidates.size(), 0.0);
    if (*std::ranges::max_element(score) < 0.1) {
        std::ranges::fill(w, 1.0 / static_cast<double>(candidates.size()));
        return w;
    }
    double total = 0.0;
    for (double s : score) {
        total += s >= 0.0 ? s : 0.0;
    }
    for (std::size_t i = 0; i < score.size(); ++i) {
        w[i] = score[i] >= 0.0 ? score[i] / total : 0.0;
    }
    return w;
}

void DirectedSampling()
{
    struct Case {
        std::vector<std::string> parents;
        std::vector<std::string> children;
        std::vector<std::string> candidates;
        std::map<std::pair<std::string, std::string>, double> cells;
    };
    std::vector<Case> cases;
    cases.push_back({ { "p" }, {}, { "a", "b" }, { { { "p", "a" }, 0.8 }, { { "p", "b" }, 0.2 } } });
    cases.push_back({ { "p" }, { "c" }, { "a", "b" }, { { { "p", "a" }, 0.6 }, { { "a", "c" }, 0.2 }, { { "p", "b" }, 0.1 } } });
    Rng setup(66);
    for (int k = 0; k < 8; ++k) {
        Case c { { "p", "q" }, { "c" }, { "o0", "o1", "o2", "o3", "o4", "o5" }, {} };
        for (auto const& cand : c.candidates) {
            for (auto const& from : c.parents) {
                if (setup.Bernoulli(0.8)) {
                    c.cells[{ from, cand }] = setup.Uniform(-1.5, 1.0);
                }
            }
            if (setup.Bernoulli(0.8)) {
                c.cells[{ cand, "c" }] = setup.Uniform(-1.5, 1.0);
            }
        }
        cases.push_back(c);
    }
    double worst = 0.0;
    std::size_t negative_draws = 0;
    std::size_t negatives = 0;
    Rng rng(606);
    for (auto const& c : cases) {
        SuitabilityTable table;
        for (auto const& [pair, value] : c.cells) {
            table.Set(pair.first, pair.second, value);
        }
        auto expected = ExpectedWeights(c.parents, c.children, c.candidates, c.cells);
        auto scores = DirectedScores(c.parents, c.children, c.candidates, table);
        bool const fallback = *std::ranges::max_element(scores) < 0.1;
        std::vector<double> hits(c.candidates.size(), 0.0);
        for (int draw = 0; draw < 10000; ++draw) {
            auto pick = ChooseNodeDirected(c.parents, c.children, c.candidates, table, rng);
            hits[static_cast<std::size_t>(std::ranges::find(c.candidates, pick) - c.candidates.begin())] += 1.0;
        }
        for (std::size_t i = 0; i < hits.size(); ++i) {
            worst = std::max(worst, std::abs(hits[i] / 10000.0 - expected[i]));
            if (!fallback && scores[i] < 0.0) {
                ++negatives;
                negative_draws += static_cast<std::size_t>(hits[i]);
            }
        }
    }
    Report(6, worst <= 0.015 && negative_draws == 0,
        fmt::format("directed sampling: {} tables x 10000 draws, max |freq - weight| {:.2f} pp, {} negative candidates drawn {} times",
            cases.size(), 100.0 * worst, negatives, negative_draws));
}

void MetaModelOrdering()
{
    auto samples = testing::MonotoneSamples(400, 1);
    ForestOptions options;
    options.seed = 3;
    auto model = FitMetaModel(testing::MonotoneHistory(samples), options);
    auto held_out = testing::MonotoneSamples(200, 2);
    std::size_t pairs = 0;
    std::size_t agree = 0;
    std::vector<double> predicted;
    for (auto const& s : held_out) {
        predicted.push_back(model.Predict(s.pipeline));
    }
    for (std::size_t i = 0; i < held_out.size(); ++i) {
        for (std::size_t j = i + 1; j < held_out.size(); ++j) {
            if (held_out[i].k == held_out[j].k) {
                continue;
            }
            ++pairs;
            bool const truth = held_out[i].k < held_out[j].k;
            agree += (predicted[i] != predicted[j] && (predicted[i] < predicted[j]) == truth) ? 1 : 0;
        }
    }
    double const accuracy = static_cast<double>(agree) / static_cast<double>(pairs);

    // a model fitted on tied fitness predicts one constant, so every
    // candidate placement scores the same
    auto tied = testing::MonotoneHistory(samples);
    for (auto& r : tied) {
        r.fitness = 1.0;
    }
    options.seed = 4;
    auto flat = FitMetaModel(tied, options);
    MetaModelAdvisor advisor(flat);
    std::vector<std::string> candidates { "knn", "minmax_scaler", "ridge", "select_k_best", "stump", "zscore_scaler" };
    PlacementBuilder build = [](std::string const& op) -> std::optional<Pipeline> {
        return Pipeline({ { "x", op, {} }, { "sink", "ridge", {} } }, { { "x", "sink" } });
    };
    Rng rng(77);
    std::vector<double> hits(candidates.size(), 0.0);
    for (int draw = 0; draw < 10000; ++draw) {
        auto pick = advisor.ChooseOperation({}, candidates, build, rng);
        hits[static_cast<std::size_t>(std::ranges::find(candidates, pick) - candidates.begin())] += 1.0;
    }
    double const p_advisor = ChiSquareP(hits);
    std::vector<double> scores(12, 0.25);
    std::vector<double> top(12, 0.0);
    for (int draw = 0; draw < 10000; ++draw) {
        top[SelectAmongTop(scores, rng)] += 1.0;
    }
    double const p_top = ChiSquareP(top);
    Report(7, accuracy >= 0.95 && p_advisor > 0.01 && p_top > 0.01,
        fmt::format("meta-model: held-out ordering accuracy {:.4f} over {} pairs; tied predictions chi-square p {:.3f} (6 candidates), {:.3f} (12 candidates)",
            accuracy, pairs, p_advisor, p_top));
}

void ToyMlSanity(OperationCatalog const& catalog)
{
    ToyMlEvaluator linear(MakeLinearRegression(1), {}, catalog);
    ToyMlEvaluator separable(MakeSeparableClassification(1), {}, catalog);
    Checker lin(linear, catalog);
    Checker sep(separable, catalog);
    auto ridge = lin.Evaluate(Pipeline({ { "z", "zscore_scaler", catalog.Find("zscore_scaler")->default_params }, { "r", "ridge", catalog.Find("ridge")->default_params } }, { { "z", "r" } }));
    auto stump = sep.Evaluate(Pipeline({ { "s", "stump", catalog.Find("stump")->default_params } }, {}));
    Report(8, ridge.valid && stump.valid && ridge.quality >= 0.99 && stump.quality >= 0.9,
        fmt::format("toy-ml: zscore_scaler -> ridge R2 {:.5f}; stump F1 {:.4f}", ridge.quality, stump.quality));
}

auto Slurp(fs::path const& path) -> std::string
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void CliDeterminism(OperationCatalog const& catalog)
{
    auto const root = fs::temp_directory_path() / "evosa_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    std::string csv = "f1,f2,f3,label\n";
    Rng rng(5);
    for (int i = 0; i < 120; ++i) {
        double a = rng.Uniform(-1, 1);
        double b = rng.Uniform(-1, 1);
        csv += fmt::format("{:.6f},{:.6f},{:.6f},{}\n", a, b, rng.Uniform(-1, 1), a + 0.5 * b > 0 ? 1 : 0);
    }
    std::ofstream(root / "data.csv") << csv;
    std::ofstream(root / "synthetic.json") << R"({"evaluator": {"type": "synthetic", "landscape_seed": 3},
        "evolution": {"population_size": 20, "max_generations": 15}})";
    std::ofstream(root / "local.json") << R"({"evaluator": {"type": "synthetic", "landscape_seed": 3},
        "evolution": {"population_size": 20, "max_generations": 15, "local_sa": true, "sa_cadence_K": 3}})";
    std::ofstream(root / "toyml.json") << R"({"evaluator": {"type": "toy_ml", "dataset": {"path": "data.csv", "target": "label", "task": "classification"}},
        "evolution": {"population_size": 10, "max_generations": 5}})";

    struct Run {
        std::string name;
        std::vector<std::string> args;
    };
    std::ostringstream sink;
    auto invoke = [&](std::vector<std::string> args) { return cli::Run(args, sink, sink); };

    // a history for the global SA runs, copied so both runs read the same file
    invoke({ "evolve", "--config", (root / "synthetic.json").string(), "--reproducible", "--seed", "99", "--out", (root / "seed_history").string() });
    fs::copy_file(root / "seed_history" / "history.jsonl", root / "h1.jsonl");
    fs::copy_file(root / "seed_history" / "history.jsonl", root / "h2.jsonl");

    std::vector<std::pair<Run, Run>> runs;
    for (auto const* name : { "synthetic", "local", "toyml" }) {
        auto cfg = (root / (std::string(name) + ".json")).string();
        std::vector<std::string> base { "evolve", "--config", cfg, "--seed", "7", "--reproducible", "--out" };
        auto a = base;
        a.push_back((root / name / "a").string());
        auto b = base;
        b.push_back((root / name / "b").string());
        runs.push_back({ { name, a }, { name, b } });
    }
    for (auto const* mode : { "suitability", "metamodel" }) {
        std::vector<std::string> base { "evolve", "--config", (root / "synthetic.json").string(), "--seed", "7", "--reproducible", "--global-sa", mode };
        auto a = base;
        a.insert(a.end(), { "--history", (root / "h1.jsonl").string(), "--out", (root / mode / "a").string() });
        auto b = base;
        b.insert(b.end(), { "--history", (root / "h2.jsonl").string(), "--out", (root / mode / "b").string() });
        runs.push_back({ { mode, a }, { mode, b } });
    }

    std::size_t identical = 0;
    std::string failures;
    for (auto& [first, second] : runs) {
        int const ca = invoke(first.args);
        int const cb = invoke(second.args);
        fs::path const da = first.args.back();
        fs::path const db = second.args.back();
        bool same = ca == 0 && cb == 0;
        for (auto const* file : { "convergence.csv", "best_pipeline.json" }) {
            same = same && fs::exists(da / file) && Slurp(da / file) == Slurp(db / file);
        }
        identical += same ? 1 : 0;
        if (!same) {
            failures += " " + first.name;
        }
        // every evaluated pipeline of the CLI runs, for the structural check
        for (auto const& dir : { da, db }) {
            std::ifstream events(dir / "events.jsonl");
            for (std::string line; std::getline(events, line);) {
                auto doc = nlohmann::json::parse(line);
                if (!Validate(PipelineFromJson(doc.at("pipeline")), catalog).Ok()) {
                    ++g_extra_invalid;
                }
            }
        }
    }
    fs::remove_all(root);
    Report(9, identical == runs.size(),
        fmt::format("determinism: {}/{} CLI evolve configurations (synthetic, local SA, toy-ml, suitability, metamodel) byte-identical{}",
            identical, runs.size(), failures.empty() ? "" : "; differing:" + failures));
}

} // namespace

auto main() -> int
{
    auto const catalog = DefaultCatalog();
    auto const start = Clock::now();
    SensitivityOracle(catalog);
    SimplificationSoundness(catalog);
    Benchmark(catalog);
    SuitabilityRecovery(catalog);
    DirectedSampling();
    MetaModelOrdering();
    ToyMlSanity(catalog);
    CliDeterminism(catalog);
    auto const invalid = Checker::Invalid() + g_extra_invalid;
    Report(10, invalid == 0,
        fmt::format("structural safety: {} evaluator calls checked, {} invalid pipelines (including constraint violations in the benchmark)",
            Checker::Evaluated(), invalid));
    fmt::print("{} of 10 criteria passed in {:.1f} s\n", 10 - g_failures, Seconds(start));
    return g_failures == 0 ? 0 : 1;
}
