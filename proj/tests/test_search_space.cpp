#include <doctest.h>

#include <algorithm>
#include <set>

#include "evosa/catalog.hpp"
#include "evosa/error.hpp"
#include "evosa/search_space.hpp"
#include "helpers.hpp"

using namespace evosa;

namespace {

auto Sorted(std::vector<std::string> v)
{
    std::ranges::sort(v);
    return v;
}

} // namespace

TEST_SUITE("search_space")
{
    TEST_CASE("default catalog")
    {
        auto c = DefaultCatalog();
        CHECK(c.Size() == 6);
        REQUIRE(c.Find("ridge") != nullptr);
        CHECK(c.Find("ridge")->may_be_sink);
        CHECK(c.Find("zscore_scaler")->kind == OperationKind::Preprocessor);
        CHECK_FALSE(c.Find("zscore_scaler")->may_be_sink);
        CHECK(Sorted(c.SinkNames()) == std::vector<std::string> { "knn", "ridge", "stump" });
        CHECK(c.Names() == Sorted(c.Names()));
    }

    TEST_CASE("catalog documents")
    {
        auto c = DefaultCatalog();
        auto again = ParseCatalog(SerializeCatalog(c));
        CHECK(again.Names() == c.Names());
        CHECK_THROWS_AS(OperationCatalog({ { "x", OperationKind::Preprocessor, true, {} } }), ConfigError);
        CHECK_THROWS_AS(OperationCatalog({ { "x", OperationKind::Model, true, {} }, { "x", OperationKind::Model, true, {} } }), ConfigError);
        CHECK_THROWS((void)ParseCatalog(R"({"format_version": 1, "operations": [{"name": "a", "kind": "wizard"}]})"));
    }

    TEST_CASE("candidate operations")
    {
        auto c = DefaultCatalog();
        CHECK(Sorted(CandidateOperations(c, { {}, {}, true })) == std::vector<std::string> { "knn", "ridge", "stump" });
        CHECK(CandidateOperations(c, { { OperationKind::Preprocessor }, { OperationKind::Model }, false }).size() == 6);
        CHECK(CandidateOperations(c, {}).size() == 6);
    }

    TEST_CASE("candidate operations are always placeable")
    {
        // Brute force over every position of every pipeline up to 3 nodes:
        // each candidate substituted at a position must give a valid pipeline.
        auto c = DefaultCatalog();
        auto ops = c.Names();
        std::vector<Pipeline> shapes = {
            testing::Make({ { "a", "ridge" } }),
            testing::Make({ { "a", "zscore_scaler" }, { "b", "ridge" } }, { { "a", "b" } }),
            testing::Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "ridge" } }, { { "a", "b" }, { "b", "c" } }),
            testing::Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "ridge" } }, { { "a", "c" }, { "b", "c" } }),
            testing::Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "ridge" } }, { { "a", "b" }, { "a", "c" }, { "b", "c" } }),
        };
        for (auto const& shape : shapes) {
            for (auto const& node : shape.Nodes()) {
                PositionContext ctx;
                for (auto const& p : shape.Parents(node.id)) {
                    ctx.parent_kinds.push_back(c.Find(shape.OperationOf(p))->kind);
                }
                for (auto const& ch : shape.Children(node.id)) {
                    ctx.child_kinds.push_back(c.Find(shape.OperationOf(ch))->kind);
                }
                ctx.is_sink = shape.Children(node.id).empty();
                auto candidates = CandidateOperations(c, ctx);
                for (auto const& op : ops) {
                    auto nodes = shape.Nodes();
                    for (auto& n : nodes) {
                        if (n.id == node.id) {
                            n.operation = op;
                        }
                    }
                    bool const valid = Validate(Pipeline(nodes, shape.Edges()), c).Ok();
                    bool const offered = std::ranges::find(candidates, op) != candidates.end();
                    CHECK(offered == valid);
                }
            }
        }
    }

    TEST_CASE("random pipeline")
    {
        auto c = DefaultCatalog();
        auto one = RandomPipeline(c, { 1, 5, 3 }, 3);
        REQUIRE(one.Size() == 1);
        CHECK(c.Find(one.Nodes()[0].operation)->kind == OperationKind::Model);
        CHECK(RandomPipeline(c, {}, 42) == RandomPipeline(c, {}, 42));
        CHECK_THROWS_AS((void)RandomPipeline(OperationCatalog({ { "p", OperationKind::Preprocessor, false, {} } }), {}, 1), ConfigError);
        CHECK_THROWS_AS((void)RandomPipeline(c, { 0, 5, 3 }, 1), ConfigError);
    }

    TEST_CASE("random pipelines are valid and within constraints")
    {
        auto c = DefaultCatalog();
        StructuralConstraints k { 6, 4, 2 };
        std::set<std::string> sizes;
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            auto p = RandomPipeline(c, k, seed);
            REQUIRE(Validate(p, c).Ok());
            CHECK(p.Size() <= 6);
            CHECK(Depth(p) <= 4);
            CHECK(MaxParents(p) <= 2);
            sizes.insert(std::to_string(p.Size()));
        }
        CHECK(sizes.size() > 3);
    }

    TEST_CASE("random pipelines cover the catalog")
    {
        auto c = DefaultCatalog();
        std::set<std::string> seen;
        for (std::uint64_t seed = 0; seed < 10000; ++seed) {
            for (auto const& n : RandomPipeline(c, {}, seed).Nodes()) {
                seen.insert(n.operation);
            }
        }
        CHECK(seen.size() == c.Size());
    }
}
