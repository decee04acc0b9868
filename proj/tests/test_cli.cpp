#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "evosa/cli.hpp"
#include "evosa/error.hpp"
#include "evosa/history.hpp"
#include "evosa/pipeline.hpp"
#include "evosa/reporting.hpp"
#include "evosa/run_config.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace evosa;

namespace {

struct Workspace {
    fs::path dir;

    explicit Workspace(std::string const& name)
        : dir(fs::temp_directory_path() / ("evosa_cli_" + name))
    {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    Workspace(Workspace const&) = delete;
    Workspace(Workspace&&) = delete;
    auto operator=(Workspace const&) -> Workspace& = delete;
    auto operator=(Workspace&&) -> Workspace& = delete;
    ~Workspace() { fs::remove_all(dir); }

    auto Write(std::string const& name, std::string const& text) const -> fs::path
    {
        auto path = dir / name;
        std::ofstream(path) << text;
        return path;
    }
};

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

auto RunCli(std::vector<std::string> args) -> Outcome
{
    std::ostringstream out;
    std::ostringstream err;
    int code = cli::Run(args, out, err);
    return { code, out.str(), err.str() };
}

auto Slurp(fs::path const& path) -> std::string
{
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

auto const kSmallConfig = R"({
  "evaluator": {"type": "synthetic", "landscape_seed": 2},
  "evolution": {"population_size": 8, "max_generations": 5, "rng_seed": 1},
  "output_dir": "out"
})";

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("run config parsing")
    {
        auto config = ParseRunConfig(kSmallConfig, "/base");
        CHECK(config.evaluator.landscape_seed == 2);
        CHECK(config.evolution.population_size == 8);
        CHECK(config.output_dir == fs::path("/base/out"));
        CHECK_THROWS_WITH_AS(ParseRunConfig(R"({"evolution": {"popsize": 3}})"), doctest::Contains("popsize"), ConfigError);
        CHECK_THROWS_AS(ParseRunConfig(R"({"evolution": {"population_size": 1}})"), ConfigError);
        CHECK_THROWS_AS(ParseRunConfig(R"({"evaluator": {"type": "quantum"}})"), ConfigError);
        auto round = ParseRunConfig(RunConfigToJson(config).dump());
        CHECK(round.evolution.population_size == 8);
    }

    TEST_CASE("evolve writes its artifacts and is reproducible")
    {
        Workspace ws("evolve");
        auto cfg = ws.Write("run.json", kSmallConfig);
        auto first = RunCli({ "evolve", "--config", cfg.string(), "--reproducible", "--out", (ws.dir / "a").string() });
        REQUIRE(first.code == 0);
        auto second = RunCli({ "evolve", "--config", cfg.string(), "--reproducible", "--out", (ws.dir / "b").string() });
        REQUIRE(second.code == 0);
        CHECK(fs::exists(ws.dir / "a" / "run_summary.json"));
        for (auto const* name : { "best_pipeline.json", "convergence.csv", "best_pipeline.dot", "events.jsonl" }) {
            CHECK(fs::exists(ws.dir / "a" / name));
            CHECK(Slurp(ws.dir / "a" / name) == Slurp(ws.dir / "b" / name));
        }
        CHECK(fs::exists(ws.dir / "a" / "pareto" / "front_00.json"));
        auto csv = Slurp(ws.dir / "a" / "convergence.csv");
        CHECK(csv.rfind("generation,wall_seconds,best_quality,mean_quality,best_complexity\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
        auto best = Deserialize(Slurp(ws.dir / "a" / "best_pipeline.json"));
        CHECK(Validate(best, DefaultCatalog()).Ok());
        auto history = HistoryStore(ws.dir / "a" / "history.jsonl").Load();
        CHECK(history.records.size() > 8);
        CHECK(history.records.front().run_id == "seed1");
    }

    TEST_CASE("evolve error exits")
    {
        Workspace ws("errors");
        auto missing = ws.Write("missing.json", R"({"evaluator": {"type": "toy_ml", "dataset": {"path": "nowhere.csv", "target": "y", "task": "regression"}}})");
        auto r = RunCli({ "evolve", "--config", missing.string(), "--out", ws.dir.string() });
        CHECK(r.code == 2);
        CHECK(r.err.find("nowhere.csv") != std::string::npos);

        auto unknown = ws.Write("unknown.json", R"({"evolutio": {}})");
        CHECK(RunCli({ "evolve", "--config", unknown.string() }).code == 2);
        CHECK(RunCli({ "evolve", "--config", (ws.dir / "absent.json").string() }).code == 2);
        CHECK(RunCli({ "evolve", "--global-sa", "suitability", "--history", (ws.dir / "none.jsonl").string(), "--out", ws.dir.string() }).code == 2);
        CHECK(RunCli({ "frobnicate" }).code == 2);
        CHECK(RunCli({ "--help" }).code == 0);
    }

    TEST_CASE("evolve on a csv dataset")
    {
        Workspace ws("csv");
        std::string csv = "a,b,label\n";
        for (int i = 0; i < 40; ++i) {
            csv += std::to_string(i % 7) + "," + std::to_string((i * 13) % 11) + "," + std::to_string(i % 7 > 3 ? 1 : 0) + "\n";
        }
        ws.Write("data.csv", csv);
        auto cfg = ws.Write("run.json", R"({
          "evaluator": {"type": "toy_ml", "dataset": {"path": "data.csv", "target": "label", "task": "classification"}},
          "evolution": {"population_size": 6, "max_generations": 2},
          "output_dir": "out"
        })");
        auto r = RunCli({ "evolve", "--config", cfg.string() });
        CHECK(r.code == 0);
        CHECK(fs::exists(ws.dir / "out" / "best_pipeline.json"));
    }

    TEST_CASE("analyze, export-dot and history commands")
    {
        Workspace ws("analyze");
        auto single = ws.Write("single.json", Serialize(testing::Make({ { "m", "knn" } })));
        auto r = RunCli({ "analyze", single.string(), "--out", (ws.dir / "one").string() });
        REQUIRE(r.code == 0);
        auto report = nlohmann::json::parse(Slurp(ws.dir / "one" / "sa_report.json"));
        std::size_t deletions = 0;
        for (auto const& rec : report["records"]) {
            if (rec["target"] == "node" && rec["action"] == "delete") {
                ++deletions;
                CHECK(rec["feasible"] == false);
            }
        }
        CHECK(deletions == 1);
        CHECK(report["records"].size() > 1);

        auto chain = ws.Write("chain.json", Serialize(testing::Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "ridge" } }, { { "a", "b" }, { "b", "c" } })));
        auto x = RunCli({ "analyze", chain.string(), "--seed", "4", "--simplify", "--out", (ws.dir / "x").string() });
        auto y = RunCli({ "analyze", chain.string(), "--seed", "4", "--simplify", "--out", (ws.dir / "y").string() });
        REQUIRE(x.code == 0);
        CHECK(Slurp(ws.dir / "x" / "sa_report.json") == Slurp(ws.dir / "y" / "sa_report.json"));
        CHECK(fs::exists(ws.dir / "x" / "simplified_pipeline.json"));
        oracle::DotGraph g;
        CHECK(oracle::ParseDot(Slurp(ws.dir / "x" / "pipeline_sa.dot"), g));
        CHECK(g.nodes.size() == 3);

        auto dot = RunCli({ "export-dot", chain.string(), "--report", (ws.dir / "x" / "sa_report.json").string() });
        REQUIRE(dot.code == 0);
        oracle::DotGraph h;
        CHECK(oracle::ParseDot(dot.out, h));

        auto cyclic = ws.Write("bad.json", Serialize(testing::Make({ { "a", "zscore_scaler" }, { "b", "ridge" } }, { { "a", "b" }, { "b", "a" } })));
        auto bad = RunCli({ "analyze", cyclic.string(), "--out", ws.dir.string() });
        CHECK(bad.code == 2);
        CHECK(bad.err.find("cycle") != std::string::npos);
    }

    TEST_CASE("suggest and history")
    {
        Workspace ws("suggest");
        HistoryStore store(ws.dir / "h.jsonl");
        auto good = testing::Make({ { "s", "zscore_scaler" }, { "k", "knn" } }, { { "s", "k" } });
        auto poor = testing::Make({ { "s", "minmax_scaler" }, { "k", "knn" } }, { { "s", "k" } });
        for (int i = 0; i < 10; ++i) {
            store.Append(HistoryRecord { "r" + std::to_string(i % 2), "d", i % 2 == 0 ? good : poor, i % 2 == 0 ? 1.0 + i : -1.0 - i, "" });
        }
        auto h = (ws.dir / "h.jsonl").string();
        auto grid = RunCli({ "suggest", "--history", h });
        CHECK(grid.code == 0);
        CHECK(grid.out.find("zscore_scaler") != std::string::npos);

        auto ranked = RunCli({ "suggest", "--history", h, "--child", "knn", "--candidates", "minmax_scaler,zscore_scaler" });
        REQUIRE(ranked.code == 0);
        auto const list_start = ranked.out.find("candidates for");
        REQUIRE(list_start != std::string::npos);
        auto const first = ranked.out.find("zscore_scaler", list_start);
        auto const second = ranked.out.find("minmax_scaler", list_start);
        CHECK(first < second);

        std::ofstream(ws.dir / "h.jsonl", std::ios::app) << "garbage\n";
        auto warned = RunCli({ "suggest", "--history", h });
        CHECK(warned.code == 0);
        CHECK(warned.err.find("line 11") != std::string::npos);

        ws.Write("empty.jsonl", "");
        CHECK(RunCli({ "suggest", "--history", (ws.dir / "empty.jsonl").string() }).code == 2);

        auto list = RunCli({ "history", "list", "--history", h });
        CHECK(list.code == 0);
        CHECK(list.out.find("r1") != std::string::npos);
        auto inspect = RunCli({ "history", "inspect", "--history", h, "--run", "r0", "--limit", "2" });
        CHECK(inspect.code == 0);
    }

    TEST_CASE("bench")
    {
        Workspace ws("bench");
        auto cfg = ws.Write("bench.json", R"({
          "evolution": {"population_size": 6, "max_generations": 4, "local_sa": false},
          "bench": {"landscapes": [1], "history_records": 40},
          "output_dir": "out"
        })");
        auto r = RunCli({ "bench", "--config", cfg.string(), "--repeats", "2" });
        REQUIRE(r.code == 0);
        auto summary = Slurp(ws.dir / "out" / "bench_summary.csv");
        CHECK(std::count(summary.begin(), summary.end(), '\n') == 4); // header + 3 arms
        auto runs = Slurp(ws.dir / "out" / "bench_runs.csv");
        CHECK(std::count(runs.begin(), runs.end(), '\n') == 7);
        auto again = RunCli({ "bench", "--config", cfg.string(), "--repeats", "2", "--out", (ws.dir / "again").string() });
        REQUIRE(again.code == 0);
        CHECK(Slurp(ws.dir / "again" / "bench_summary.csv") == summary);
        CHECK(RunCli({ "bench", "--config", cfg.string(), "--repeats", "1" }).code == 2);
    }

    TEST_CASE("median helpers")
    {
        CHECK(Median({ 3.0, 1.0, 2.0 }) == 2.0);
        CHECK(Median({ 4.0, 1.0, 2.0, 3.0 }) == 2.5);
        std::vector<double> v { 1.0, 2.0, 3.0, 4.0 };
        CHECK(SampleStdDev(v) == doctest::Approx(std::sqrt(5.0 / 3.0)));

        auto curve = [](std::vector<double> q, std::vector<std::size_t> e) {
            std::vector<GenerationStats> s;
            for (std::size_t i = 0; i < q.size(); ++i) {
                s.push_back({ i, 0.0, q[i], q[i], 1, e[i] });
            }
            return s;
        };
        std::vector<std::vector<GenerationStats>> curves { curve({ 0, 1, 2 }, { 10, 20, 30 }), curve({ 0, 2, 3 }, { 10, 22, 34 }), curve({ 1, 1, 1 }, { 10, 20, 30 }) };
        CHECK(*MedianCurveEvaluationsToTarget(curves, 1.0) == 20.0);
        CHECK(*MedianCurveEvaluationsToTarget(curves, 2.0) == 30.0);
        CHECK_FALSE(MedianCurveEvaluationsToTarget(curves, 5.0).has_value());
    }
}
