#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>

#include "evosa/dot.hpp"
#include "evosa/error.hpp"
#include "evosa/local_sa.hpp"
#include "evosa/pipeline.hpp"
#include "evosa/random.hpp"
#include "evosa/variation.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace evosa;
using testing::Make;
using testing::Pairs;

namespace {

auto const kCatalog = DefaultCatalog();

auto Chain() { return Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "ridge" } }, { { "a", "b" }, { "b", "c" } }); }

auto Diamond()
{
    return Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "select_k_best" }, { "d", "knn" } },
        { { "a", "b" }, { "a", "c" }, { "b", "d" }, { "c", "d" } });
}

// Random DAG over n nodes: edges only from lower to higher index, and every
// node but the last feeds some later node so there is a single sink.
auto RandomDag(std::size_t n, Rng& rng) -> Pipeline
{
    std::vector<OperationNode> nodes;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("v" + std::to_string(rng.Index(1000000)) + "_" + std::to_string(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
        nodes.push_back({ ids[i], i + 1 == n ? "ridge" : "zscore_scaler", {} });
    }
    std::set<Edge> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        edges.insert({ ids[i], ids[i + 1 + rng.Index(n - i - 1)] });
        if (rng.Bernoulli(0.3)) {
            edges.insert({ ids[i], ids[i + 1 + rng.Index(n - i - 1)] });
        }
    }
    return { nodes, { edges.begin(), edges.end() } };
}

} // namespace

TEST_SUITE("pipeline")
{
    TEST_CASE("validate reports every violation")
    {
        CHECK(Validate(Chain(), kCatalog).Ok());

        auto cyclic = Make({ { "a", "zscore_scaler" }, { "b", "ridge" } }, { { "a", "b" }, { "b", "a" } });
        CHECK(Validate(cyclic, kCatalog).Has(ViolationKind::Cycle));

        auto split = Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "ridge" }, { "d", "knn" } }, { { "a", "c" }, { "b", "d" } });
        auto v = Validate(split, kCatalog);
        CHECK(v.Has(ViolationKind::MultipleSinks));
        CHECK(v.Has(ViolationKind::NotConnected));
        CHECK(v.violations.size() >= 2);
    }

    TEST_CASE("validate structural rules")
    {
        CHECK(Validate(Pipeline {}, kCatalog).Has(ViolationKind::EmptyPipeline));
        CHECK(Validate(Make({ { "a", "nope" } }), kCatalog).Has(ViolationKind::UnknownOperation));
        CHECK(Validate(Make({ { "a", "zscore_scaler" } }), kCatalog).Has(ViolationKind::SinkNotModel));
        CHECK(Validate(Make({ { "a", "ridge" } }, { { "a", "zz" } }), kCatalog).Has(ViolationKind::DanglingEdge));
        CHECK(Validate(Make({ { "a", "ridge" } }, { { "a", "a" } }), kCatalog).Has(ViolationKind::SelfLoop));
        CHECK(Validate(Make({ { "a", "zscore_scaler" }, { "a", "ridge" } }), kCatalog).Has(ViolationKind::DuplicateNodeId));
    }

    TEST_CASE("topological order")
    {
        CHECK(TopologicalOrder(Chain()) == std::vector<std::string> { "a", "b", "c" });
        CHECK(TopologicalOrder(Diamond()) == std::vector<std::string> { "a", "b", "c", "d" });
        CHECK(TopologicalOrder(Make({ { "x", "ridge" } })) == std::vector<std::string> { "x" });
        CHECK_THROWS_AS((void)TopologicalOrder(Make({ { "a", "zscore_scaler" }, { "b", "ridge" } }, { { "a", "b" }, { "b", "a" } })), StructuralError);
    }

    TEST_CASE("topological order is consistent on random DAGs up to 50 nodes")
    {
        Rng rng(7);
        for (int trial = 0; trial < 300; ++trial) {
            auto p = RandomDag(1 + rng.Index(50), rng);
            REQUIRE(Validate(p, kCatalog).Ok());
            auto order = TopologicalOrder(p);
            REQUIRE(order.size() == p.Size());
            std::map<std::string, std::size_t> pos;
            for (std::size_t i = 0; i < order.size(); ++i) {
                pos[order[i]] = i;
            }
            for (auto const& e : p.Edges()) {
                CHECK(pos[e.source] < pos[e.target]);
            }
            CHECK(TopologicalOrder(p) == order);
        }
    }

    TEST_CASE("delete node bridges parents to the smallest child")
    {
        CHECK(testing::EdgeSet(DeleteNode(Chain(), "b", kCatalog)) == Pairs { { "a", "c" } });
        CHECK(testing::EdgeSet(DeleteNode(Diamond(), "b", kCatalog)) == Pairs { { "a", "c" }, { "a", "d" }, { "c", "d" } });
        auto no_source = DeleteNode(Chain(), "a", kCatalog);
        CHECK(testing::EdgeSet(no_source) == Pairs { { "b", "c" } });
        CHECK(no_source.Size() == 2);
        CHECK_THROWS_WITH_AS((void)DeleteNode(Make({ { "m", "ridge" } }), "m", kCatalog), "cannot empty pipeline", StructuralError);
        // the sink has no child to bridge to
        CHECK_THROWS_AS((void)DeleteNode(Chain(), "c", kCatalog), StructuralError);
    }

    TEST_CASE("replace node")
    {
        auto p = Make({ { "a", "zscore_scaler" }, { "s", "knn" } }, { { "a", "s" } });
        auto q = ReplaceNode(p, "s", "ridge", kCatalog);
        CHECK(q.Edges() == p.Edges());
        CHECK(q.OperationOf("s") == "ridge");
        auto r = ReplaceNode(p, "a", "stump", kCatalog);
        CHECK(r.OperationOf("a") == "stump");
        CHECK(Validate(r, kCatalog).Ok());
        CHECK_THROWS_AS((void)ReplaceNode(p, "a", "no_such_op", kCatalog), ConstraintError);
        CHECK_THROWS_AS((void)ReplaceNode(p, "s", "zscore_scaler", kCatalog), ConstraintError);
        CHECK(ReplaceNode(p, "a", "select_k_best", kCatalog).Find("a")->params == kCatalog.Find("select_k_best")->default_params);
    }

    TEST_CASE("delete and replace edges")
    {
        // b loses its only parent and becomes a second source
        auto d = DeleteEdge(Diamond(), { "a", "b" }, kCatalog);
        CHECK(d.Sources() == std::vector<std::string> { "a", "b" });
        CHECK(Validate(d, kCatalog).Ok());
        // a chain cannot lose an edge without disconnecting
        CHECK_THROWS_AS((void)DeleteEdge(Chain(), { "a", "b" }, kCatalog), StructuralError);

        auto dag = Make({ { "a", "zscore_scaler" }, { "b", "minmax_scaler" }, { "c", "select_k_best" }, { "d", "knn" } },
            { { "a", "b" }, { "a", "c" }, { "a", "d" }, { "b", "d" }, { "c", "d" } });
        auto moved = ReplaceEdge(dag, { "a", "d" }, { "b", "c" }, kCatalog);
        CHECK(moved.HasEdge({ "b", "c" }));
        CHECK_FALSE(moved.HasEdge({ "a", "d" }));
        CHECK(moved.Edges().size() == dag.Edges().size());
        CHECK(Validate(moved, kCatalog).Ok());
        CHECK_THROWS_AS((void)ReplaceEdge(dag, { "a", "b" }, { "d", "a" }, kCatalog), StructuralError);
    }

    TEST_CASE("structural complexity counts nodes")
    {
        CHECK(StructuralComplexity(Make({ { "x", "ridge" } })) == 1);
        CHECK(StructuralComplexity(Diamond()) == 4);
        CHECK(StructuralComplexity(Chain()) == 3);
        CHECK(Depth(Diamond()) == 3);
        CHECK(MaxParents(Diamond()) == 2);
    }

    TEST_CASE("serialization is canonical and round-trips")
    {
        auto p = Diamond();
        CHECK(Deserialize(Serialize(p)) == p);
        auto permuted = Make({ { "d", "knn" }, { "c", "select_k_best" }, { "a", "zscore_scaler" }, { "b", "minmax_scaler" } },
            { { "c", "d" }, { "b", "d" }, { "a", "c" }, { "a", "b" } });
        CHECK(Serialize(permuted) == Serialize(p));
        auto doc = Serialize(p);
        CHECK_THROWS_AS((void)Deserialize(doc.substr(0, doc.size() / 2)), ParseError);
        CHECK_THROWS_AS((void)Deserialize(R"({"format_version": 1, "nodes": [{"id": 3}], "edges": []})"), ParseError);
        CHECK(doc.find("\"format_version\"") != std::string::npos);
    }

    TEST_CASE("serialization keeps params")
    {
        auto p = ReplaceNode(Chain(), "a", "select_k_best", kCatalog);
        auto q = Deserialize(Serialize(p));
        CHECK(q.Find("a")->params == p.Find("a")->params);
    }

    TEST_CASE("dot export")
    {
        auto p = Make({ { "a", "zscore_scaler" }, { "b", "ridge" } }, { { "a", "b" } });
        oracle::DotGraph g;
        REQUIRE(oracle::ParseDot(ToDot(p), g));
        CHECK(g.nodes.size() == 2);
        CHECK(g.edges.size() == 1);
        CHECK(g.nodes["a"]["label"] == "zscore_scaler");

        DotAnnotations empty;
        CHECK(ToDot(p, &empty) == ToDot(p));

        DotAnnotations notes;
        notes.node_index["a"] = 0.12345;
        notes.node_index["b"] = -0.5;
        notes.edge_index[{ "a", "b" }] = 0.25;
        oracle::DotGraph h;
        REQUIRE(oracle::ParseDot(ToDot(p, &notes), h));
        CHECK(h.nodes["a"]["label"] == "zscore_scaler\\nS=0.123");
        CHECK(h.nodes["a"]["color"] == "firebrick");
        CHECK(h.nodes["b"]["color"] == "steelblue");
        CHECK(h.edge_attrs[{ "a", "b" }]["label"] == "S=0.250");
    }

    TEST_CASE("dot escapes quotes in ids")
    {
        auto p = Make({ { "we\"ird", "zscore_scaler" }, { "b", "ridge" } }, { { "we\"ird", "b" } });
        oracle::DotGraph g;
        REQUIRE(oracle::ParseDot(ToDot(p), g));
        CHECK(g.nodes.count("we\"ird") == 1);
    }

    TEST_CASE("random edit sequences never yield invalid pipelines")
    {
        Rng rng(11);
        StructuralConstraints loose { 12, 12, 4 };
        for (int trial = 0; trial < 200; ++trial) {
            auto p = RandomDag(2 + rng.Index(6), rng);
            for (int step = 0; step < 25; ++step) {
                auto nodes = p.Nodes();
                auto const& node = nodes[rng.Index(nodes.size())];
                auto ops = kCatalog.Names();
                try {
                    switch (rng.Index(5)) {
                    case 0: p = DeleteNode(p, node.id, kCatalog); break;
                    case 1: p = ReplaceNode(p, node.id, ops[rng.Index(ops.size())], kCatalog); break;
                    case 2:
                        if (!p.Edges().empty()) {
                            p = DeleteEdge(p, p.Edges()[rng.Index(p.Edges().size())], kCatalog);
                        }
                        break;
                    case 3: {
                        auto const& other = nodes[rng.Index(nodes.size())];
                        p = AddEdge(p, { node.id, other.id }, kCatalog);
                        break;
                    }
                    default: {
                        if (auto m = TryMutation(static_cast<MutationOperator>(rng.Index(5)), p, kCatalog, loose, rng)) {
                            p = *m;
                        }
                    }
                    }
                } catch (StructuralError const&) {
                } catch (ConstraintError const&) {
                }
                REQUIRE(Validate(p, kCatalog).Ok());
            }
        }
    }
}
