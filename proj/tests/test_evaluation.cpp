#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "evosa/dataset.hpp"
#include "evosa/error.hpp"
#include "evosa/evaluator.hpp"
#include "evosa/metrics.hpp"
#include "evosa/models.hpp"
#include "evosa/search_space.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace evosa;
using testing::Make;

namespace {

auto Rows(Matrix const& m)
{
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < m.Rows(); ++r) {
        out.emplace_back(m.Row(r).begin(), m.Row(r).end());
    }
    return out;
}

} // namespace

TEST_SUITE("evaluation")
{
    TEST_CASE("synthetic evaluator matches the independent landscape")
    {
        auto catalog = DefaultCatalog();
        oracle::Landscape reference(catalog.Names(), 5);
        SyntheticEvaluator eval(catalog, 5);
        auto single = Make({ { "m", "ridge" } });
        CHECK(eval.Evaluate(single).quality == doctest::Approx(reference.score["ridge"] - 0.05).epsilon(1e-15));
        for (std::uint64_t s = 0; s < 200; ++s) {
            auto p = RandomPipeline(catalog, {}, s);
            auto r = eval.Evaluate(p);
            REQUIRE(r.valid);
            CHECK(std::abs(r.quality - reference.Quality(p)) < 1e-12);
            CHECK(r.complexity == p.Size());
            CHECK(r.train_seconds == 0.0);
        }
    }

    TEST_CASE("synthetic evaluator is linear in its tables")
    {
        auto catalog = DefaultCatalog();
        SyntheticEvaluator eval(catalog, 9);
        auto base = Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "ridge" } }, { { "a", "c" }, { "b", "c" } });
        auto more = Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "ridge" } }, { { "a", "b" }, { "a", "c" }, { "b", "c" } });
        double const delta = eval.Evaluate(more).quality - eval.Evaluate(base).quality;
        CHECK(std::abs(delta - eval.EdgeBonus("zscore_scaler", "minmax_scaler")) < 1e-12);

        // removing a leaf source: -op_score - adjacent bonus + lambda
        auto chain = Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "ridge" } }, { { "a", "b" }, { "b", "c" } });
        auto cut = DeleteNode(chain, "a", catalog);
        double const expected = -eval.OpScore("zscore_scaler") - eval.EdgeBonus("zscore_scaler", "minmax_scaler") + 0.05;
        CHECK(std::abs(eval.Evaluate(cut).quality - eval.Evaluate(chain).quality - expected) < 1e-12);
    }

    TEST_CASE("evaluations are deterministic")
    {
        auto catalog = DefaultCatalog();
        SyntheticEvaluator synth(catalog, 2);
        ToyMlEvaluator ml(MakeSeparableClassification(3), {}, catalog);
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto p = RandomPipeline(catalog, { 4, 3, 2 }, s);
            auto a = synth.Evaluate(p);
            auto b = ml.Evaluate(p);
            for (int rep = 0; rep < 5; ++rep) {
                CHECK(synth.Evaluate(p).SameOutcome(a));
                CHECK(ml.Evaluate(p).SameOutcome(b));
            }
        }
    }

    TEST_CASE("invalid pipelines get the sentinel")
    {
        auto catalog = DefaultCatalog();
        SyntheticEvaluator eval(catalog, 1);
        auto r = eval.Evaluate(Make({ { "a", "zscore_scaler" } }));
        CHECK_FALSE(r.valid);
        CHECK(r.quality == kWorstQuality);
        CHECK_FALSE(r.reason.empty());
    }

    TEST_CASE("stump separates a linearly separable dataset")
    {
        auto data = MakeSeparableClassification(1, 100, 2);
        ToyMlEvaluator eval(data, { 0.75, 1 }, DefaultCatalog());
        auto r = eval.Evaluate(Make({ { "s", "stump" } }));
        REQUIRE(r.valid);
        CHECK(r.quality >= 0.9);

        // the fitted split makes as few training errors as exhaustive search
        StumpModel stump(Task::Classification);
        stump.Fit(data.Features(), data.Target());
        auto fitted = stump.Apply(data.Features());
        std::size_t errors = 0;
        for (std::size_t i = 0; i < data.Rows(); ++i) {
            errors += fitted(i, 0) != data.Target()[i] ? 1 : 0;
        }
        CHECK(errors == oracle::BestStump(Rows(data.Features()), data.Target()).errors);
    }

    TEST_CASE("zscore then ridge fits a linear target")
    {
        auto data = MakeLinearRegression(4, 200, 3, 0.01);
        ToyMlEvaluator eval(data, { 0.75, 4 }, DefaultCatalog());
        auto r = eval.Evaluate(Make({ { "z", "zscore_scaler" }, { "r", "ridge" } }, { { "z", "r" } }));
        REQUIRE(r.valid);
        CHECK(r.quality >= 0.99);
    }

    TEST_CASE("ridge agrees with the elimination oracle")
    {
        auto data = MakeLinearRegression(8, 60, 4, 0.3);
        RidgeModel ridge(Task::Regression, 1.0);
        ridge.Fit(data.Features(), data.Target());
        auto pred = ridge.Apply(data.Features());
        auto w = oracle::Ridge(Rows(data.Features()), data.Target(), 1.0);
        for (std::size_t i = 0; i < data.Rows(); ++i) {
            double y = w[0];
            for (std::size_t j = 0; j < 4; ++j) {
                y += w[j + 1] * data.Features()(i, j);
            }
            CHECK(std::abs(pred(i, 0) - y) < 1e-9);
        }
    }

    TEST_CASE("stacking concatenates parent outputs")
    {
        auto data = MakeLinearRegression(2, 80, 3);
        ToyMlEvaluator eval(data, {}, DefaultCatalog());
        auto p = Make({ { "a", "ridge" }, { "b", "knn" }, { "c", "ridge" } }, { { "a", "c" }, { "b", "c" } });
        CHECK(eval.InputWidth(p, "c") == 2);
        CHECK(eval.InputWidth(p, "a") == 3);
        CHECK(eval.Evaluate(p).valid);
    }

    TEST_CASE("unsupported operations and numerical failure")
    {
        std::vector<OperationSpec> specs = DefaultCatalog().Specs();
        specs.push_back({ "mystery_model", OperationKind::Model, true, {} });
        OperationCatalog catalog(specs);
        ToyMlEvaluator eval(MakeLinearRegression(1), {}, catalog);
        auto r = eval.Evaluate(Make({ { "m", "mystery_model" } }));
        CHECK_FALSE(r.valid);
        CHECK(r.quality == kWorstQuality);

        CHECK_THROWS_AS((void)CholeskySolve({ 1.0, 2.0, 2.0, 1.0 }, 2, { { 1.0, 1.0 } }), NumericalError);
    }

    TEST_CASE("metrics")
    {
        std::vector<double> labels { 1, 0, 1, 0 };
        CHECK(MetricF1(labels, labels) == 1.0);
        std::vector<double> preds { 1, 1, 0, 0 };
        CHECK(MetricF1(preds, labels) == doctest::Approx(0.5));
        std::vector<double> y { 1, 2, 3, 4 };
        std::vector<double> mean(4, 2.5);
        CHECK(*MetricR2(mean, y) == doctest::Approx(0.0));
        CHECK(*MetricR2(y, y) == 1.0);
        std::vector<double> flat(4, 1.0);
        CHECK_FALSE(MetricR2(y, flat).has_value());
        // three classes, macro average: class 0 F1 1, class 1 F1 2/3, class 2 F1 0
        std::vector<double> l3 { 0, 1, 1, 2 };
        std::vector<double> p3 { 0, 1, 2, 1 };
        CHECK(MetricF1(p3, l3) == doctest::Approx((1.0 + 0.5 + 0.0) / 3.0));
    }

    TEST_CASE("csv loading")
    {
        CHECK_THROWS_WITH_AS(ParseCsv("x,y\n1,2\n3,4\n5,6\n", "y", Task::Regression, "t"), doctest::Contains("too few rows"), DataError);

        std::string text = "c,x,y\n";
        for (int i = 0; i < 12; ++i) {
            text += (i % 3 == 1 ? "b" : "a") + std::string(",") + std::to_string(i) + "," + std::to_string(i % 2) + "\n";
        }
        auto loaded = ParseCsv(text, "y", Task::Classification, "t");
        CHECK(loaded.dataset.Features().Column(0)[0] == 0.0);
        CHECK(loaded.dataset.Features().Column(0)[1] == 1.0);
        CHECK(loaded.dataset.Features().Column(0)[2] == 0.0);
        CHECK_THROWS_AS(ParseCsv(text, "missing", Task::Classification, "t"), DataError);

        auto bad = text + "a,oops,1\na,3\n";
        CHECK(ParseCsv(bad, "y", Task::Classification, "t").dropped_rows == 2);

        CHECK_THROWS_AS(LoadCsv("/nonexistent/file.csv", "y", Task::Regression), DataError);
        auto path = std::filesystem::temp_directory_path() / "evosa_test_load.csv";
        std::ofstream(path) << text;
        CHECK(LoadCsv(path, "y", Task::Classification).dataset.Rows() == 12);
        std::filesystem::remove(path);
    }

    TEST_CASE("batch evaluation kernels agree")
    {
        auto catalog = DefaultCatalog();
        ToyMlEvaluator eval(MakeLinearRegression(3), {}, catalog);
        std::vector<Pipeline> batch;
        for (std::uint64_t s = 0; s < 24; ++s) {
            batch.push_back(RandomPipeline(catalog, { 4, 3, 2 }, s));
        }
        auto serial = EvaluateBatchSerial(batch, eval);
        auto parallel = EvaluateBatchParallel(batch, eval, 4);
        REQUIRE(serial.size() == parallel.size());
        for (std::size_t i = 0; i < serial.size(); ++i) {
            CHECK(serial[i].SameOutcome(parallel[i]));
        }
    }

    TEST_CASE("knn kernels agree")
    {
        auto data = MakeLinearRegression(5, 120, 3);
        auto query = MakeLinearRegression(6, 40, 3);
        auto s = KnnPredictSerial(data.Features(), data.Target(), query.Features(), 5, Task::Regression);
        auto p = KnnPredictParallel(data.Features(), data.Target(), query.Features(), 5, Task::Regression, 4);
        CHECK(s == p);
    }

    TEST_CASE("caching evaluator counts hits")
    {
        auto catalog = DefaultCatalog();
        SyntheticEvaluator eval(catalog, 1);
        CountingEvaluator counting(eval);
        CachingEvaluator cache(counting);
        auto p = RandomPipeline(catalog, {}, 1);
        (void)cache.Evaluate(p);
        (void)cache.Evaluate(p);
        CHECK(counting.Calls() == 1);
        CHECK(cache.Hits() == 1);
    }
}
