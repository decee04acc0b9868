#include "evosa/suitability.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "evosa/error.hpp"

namespace evosa {

auto NormalizedRank(std::span<double const> fitness) -> std::vector<double>
{
    auto const n = fitness.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    std::ranges::stable_sort(order, [&](auto a, auto b) { return fitness[a] < fitness[b]; });

    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        auto j = i;
        while (j + 1 < n && fitness[order[j + 1]] == fitness[order[i]]) {
            ++j;
        }
        // positions i+1 .. j+1, mean = (i + j + 2) / 2
        auto const mean = static_cast<double>(i + j + 2) / 2.0;
        for (auto k = i; k <= j; ++k) {
            rank[order[k]] = mean / static_cast<double>(n);
        }
        i = j + 1;
    }
    return rank;
}

auto NormalizedRanksByDataset(std::span<HistoryRecord const> records) -> std::vector<double>
{
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
        groups[records[i].dataset_id].push_back(i);
    }
    std::vector<double> out(records.size());
    for (auto const& [dataset, members] : groups) {
        std::vector<double> fitness;
        fitness.reserve(members.size());
        for (auto i : members) {
            fitness.push_back(records[i].fitness);
        }
        auto ranks = NormalizedRank(fitness);
        for (std::size_t k = 0; k < members.size(); ++k) {
            out[members[k]] = ranks[k];
        }
    }
    return out;
}

auto SuitabilityTable::Get(std::string const& from, std::string const& to) const -> std::optional<double>
{
    auto it = cells_.find({ from, to });
    if (it == cells_.end()) {
        return std::nullopt;
    }
    return it->second.value;
}

auto SuitabilityTable::Support(std::string const& from, std::string const& to) const -> std::size_t
{
    auto it = cells_.find({ from, to });
    return it == cells_.end() ? 0 : it->second.support;
}

void SuitabilityTable::Set(std::string const& from, std::string const& to, double value, std::size_t support)
{
    if (support == 0) {
        cells_.erase({ from, to });
        return;
    }
    cells_[{ from, to }] = { value, support };
}

auto SuitabilityTable::Operations() const -> std::vector<std::string>
{
    std::set<std::string> ops;
    for (auto const& [pair, cell] : cells_) {
        ops.insert(pair.first);
        ops.insert(pair.second);
    }
    return { ops.begin(), ops.end() };
}

auto SuitabilityTable::ToJson() const -> nlohmann::json
{
    auto cells = nlohmann::json::array();
    for (auto const& [pair, cell] : cells_) {
        cells.push_back({ { "from", pair.first }, { "to", pair.second }, { "value", cell.value }, { "support", cell.support } });
    }
    return { { "format_version", 1 }, { "operations", Operations() }, { "cells", cells } };
}

auto SuitabilityTable::FromJson(nlohmann::json const& doc) -> SuitabilityTable
{
    SuitabilityTable table;
    try {
        auto const& cells = doc.at("cells");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            auto const& c = cells[i];
            table.Set(c.at("from").get<std::string>(), c.at("to").get<std::string>(), c.at("value").get<double>(),
                c.at("support").get<std::size_t>());
        }
    } catch (nlohmann::json::exception const& e) {
        throw ParseError(e.what(), "$.cells");
    }
    return table;
}

auto SuitabilityTable::Grid(std::vector<std::string> const& operations) const -> std::string
{
    auto const ops = operations.empty() ? Operations() : operations;
    std::size_t width = 6;
    for (auto const& op : ops) {
        width = std::max(width, op.size());
    }
    std::string out = fmt::format("{:<{}}", "from\\to", width);
    for (auto const& op : ops) {
        out += fmt::format(" {:>{}}", op, width);
    }
    out += '\n';
    for (auto const& from : ops) {
        out += fmt::format("{:<{}}", from, width);
        for (auto const& to : ops) {
            auto value = Get(from, to);
            out += value ? fmt::format(" {:>{}.3f}", *value, width) : fmt::format(" {:>{}}", "-", width);
        }
        out += '\n';
    }
    return out;
}

auto BuildSuitabilityTable(std::span<HistoryRecord const> history) -> SuitabilityTable
{
    auto const ranks = NormalizedRanksByDataset(history);
    std::map<OperationPair, std::pair<double, std::size_t>> sums;
    for (std::size_t i = 0; i < history.size(); ++i) {
        auto const& p = history[i].pipeline;
        std::set<OperationPair> pairs;
        for (auto const& e : p.Edges()) {
            pairs.emplace(p.OperationOf(e.source), p.OperationOf(e.target));
        }
        for (auto const& pair : pairs) {
            auto& [sum, count] = sums[pair];
            sum += ranks[i];
            ++count;
        }
    }
    SuitabilityTable table;
    for (auto const& [pair, acc] : sums) {
        table.Set(pair.first, pair.second, acc.first / static_cast<double>(acc.second), acc.second);
    }
    return table;
}

auto DirectedScores(std::vector<std::string> const& parent_ops, std::vector<std::string> const& child_ops,
    std::vector<std::string> const& candidates, SuitabilityTable const& table) -> std::vector<double>
{
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (auto const& c : candidates) {
        double score = 0.0;
        for (auto const& p : parent_ops) {
            score += table.Get(p, c).value_or(kNeutralSuitability);
        }
        for (auto const& ch : child_ops) {
            score += table.Get(c, ch).value_or(kNeutralSuitability);
        }
        scores.push_back(score);
    }
    return scores;
}

auto ChooseNodeDirected(std::vector<std::string> const& parent_ops, std::vector<std::string> const& child_ops,
    std::vector<std::string> const& candidates, SuitabilityTable const& table, Rng& rng) -> std::string
{
    if (candidates.empty()) {
        throw ConfigError("directed node choice needs at least one candidate");
    }
    auto const scores = DirectedScores(parent_ops, child_ops, candidates, table);
    std::vector<std::size_t> kept;
    double best = -1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] < 0.0) {
            continue;
        }
        kept.push_back(i);
        best = std::max(best, scores[i]);
        total += scores[i];
    }
    if (kept.empty() || best < kFallbackScore) {
        return candidates[rng.Index(candidates.size())];
    }
    auto draw = rng.Uniform01() * total;
    for (auto i : kept) {
        if (draw < scores[i]) {
            return candidates[i];
        }
        draw -= scores[i];
    }
    // rounding left a sliver past the last bin
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
        if (scores[*it] > 0.0) {
            return candidates[*it];
        }
    }
    return candidates[kept.back()];
}

auto DirectedProbabilities(std::vector<std::string> const& parent_ops, std::vector<std::string> const& child_ops,
    std::vector<std::string> const& candidates, SuitabilityTable const& table) -> std::vector<double>
{
    auto const scores = DirectedScores(parent_ops, child_ops, candidates, table);
    std::vector<double> probabilities(candidates.size(), 0.0);
    if (candidates.empty()) {
        return probabilities;
    }
    double best = -1.0;
    double total = 0.0;
    for (auto s : scores) {
        if (s >= 0.0) {
            best = std::max(best, s);
            total += s;
        }
    }
    if (best < kFallbackScore) {
        std::ranges::fill(probabilities, 1.0 / static_cast<double>(candidates.size()));
        return probabilities;
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        probabilities[i] = scores[i] >= 0.0 ? scores[i] / total : 0.0;
    }
    return probabilities;
}

auto SuitabilityAdvisor::ChooseOperation(MutationSite const& site, std::vector<std::string> const& candidates,
    PlacementBuilder const& /*build*/, Rng& rng) const -> std::string
{
    return ChooseNodeDirected(site.parent_ops, site.child_ops, candidates, table_, rng);
}

auto DirectedNodeChange(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    SuitabilityTable const& table, Rng& rng) -> Pipeline
{
    SuitabilityAdvisor advisor(table);
    for (int attempt = 0; attempt < kMutationAttempts; ++attempt) {
        if (auto result = TryNodeChange(pipeline, catalog, constraints, rng, &advisor)) {
            return *result;
        }
    }
    return pipeline;
}

auto DirectedNodeAdd(Pipeline const& pipeline, OperationCatalog const& catalog, StructuralConstraints const& constraints,
    SuitabilityTable const& table, Rng& rng) -> Pipeline
{
    SuitabilityAdvisor advisor(table);
    for (int attempt = 0; attempt < kMutationAttempts; ++attempt) {
        if (auto result = TryNodeAdd(pipeline, catalog, constraints, rng, &advisor)) {
            return *result;
        }
    }
    return pipeline;
}

} // namespace evosa
