#ifndef EVOSA_TESTS_HELPERS_HPP
#define EVOSA_TESTS_HELPERS_HPP

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "evosa/pipeline.hpp"

namespace testing {

// Pipeline from (id, op) nodes and (src, dst) edges.
inline auto Make(std::initializer_list<std::pair<char const*, char const*>> nodes,
    std::initializer_list<std::pair<char const*, char const*>> edges = {}) -> evosa::Pipeline
{
    std::vector<evosa::OperationNode> n;
    for (auto const& [id, op] : nodes) {
        n.push_back({ id, op, {} });
    }
    std::vector<evosa::Edge> e;
    for (auto const& [a, b] : edges) {
        e.push_back({ a, b });
    }
    return { std::move(n), std::move(e) };
}

inline auto EdgeSet(evosa::Pipeline const& p) -> std::vector<std::pair<std::string, std::string>>
{
    std::vector<std::pair<std::string, std::string>> out;
    for (auto const& e : p.Edges()) {
        out.emplace_back(e.source, e.target);
    }
    return out;
}

using Pairs = std::vector<std::pair<std::string, std::string>>;

} // namespace testing

#endif
