#include "evosa/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evosa/error.hpp"
#include "evosa/parallel.hpp"

namespace evosa {

namespace {

    auto Mean(std::span<double const> y, std::span<std::size_t const> rows) -> double
    {
        double sum = 0.0;
        for (auto r : rows) {
            sum += y[r];
        }
        return sum / static_cast<double>(rows.size());
    }

    struct Split {
        int feature { -1 };
        double threshold { 0.0 };
        double sse { 0.0 };
    };

} // namespace

auto operator==(RegressionTree const& a, RegressionTree const& b) -> bool
{
    return std::ranges::equal(a.nodes_, b.nodes_, [](auto const& l, auto const& r) {
        return l.feature == r.feature && l.threshold == r.threshold && l.left == r.left && l.right == r.right && l.value == r.value;
    });
}

void RegressionTree::Fit(Matrix const& x, std::span<double const> y, std::span<std::size_t const> rows,
    std::size_t max_depth, std::size_t min_samples_split, std::size_t features_per_split, Rng& rng)
{
    if (rows.empty()) {
        throw TrainingError("regression tree needs at least one row");
    }
    nodes_.clear();
    std::vector<std::size_t> work(rows.begin(), rows.end());
    Grow(x, y, work, 0, max_depth, min_samples_split, std::clamp<std::size_t>(features_per_split, 1, std::max<std::size_t>(x.Cols(), 1)), rng);
}

auto RegressionTree::Grow(Matrix const& x, std::span<double const> y, std::vector<std::size_t>& rows, std::size_t depth,
    std::size_t max_depth, std::size_t min_samples_split, std::size_t features_per_split, Rng& rng) -> std::size_t
{
    auto const index = nodes_.size();
    nodes_.push_back({});
    auto const mean = Mean(y, rows);
    nodes_[index].value = mean;

    double parent_sse = 0.0;
    for (auto r : rows) {
        parent_sse += (y[r] - mean) * (y[r] - mean);
    }
    if (depth >= max_depth || rows.size() < min_samples_split || parent_sse <= 1e-12 || x.Cols() == 0) {
        return index;
    }

    std::vector<std::size_t> features(x.Cols());
    std::iota(features.begin(), features.end(), std::size_t { 0 });
    // partial Fisher-Yates for the feature subset
    for (std::size_t i = 0; i < features_per_split; ++i) {
        std::swap(features[i], features[i + rng.Index(features.size() - i)]);
    }
    features.resize(features_per_split);
    std::ranges::sort(features);

    Split best { -1, 0.0, parent_sse };
    std::vector<std::size_t> order(rows);
    auto const n = rows.size();
    for (auto f : features) {
        std::ranges::sort(order, [&](auto a, auto b) { return x(a, f) < x(b, f); });
        double left_sum = 0.0;
        double left_sq = 0.0;
        double total_sum = 0.0;
        double total_sq = 0.0;
        for (auto r : order) {
            total_sum += y[r];
            total_sq += y[r] * y[r];
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            auto const v = y[order[i]];
            left_sum += v;
            left_sq += v * v;
            auto const a = x(order[i], f);
            auto const b = x(order[i + 1], f);
            if (a == b) {
                continue;
            }
            auto const nl = static_cast<double>(i + 1);
            auto const nr = static_cast<double>(n - i - 1);
            auto const right_sum = total_sum - left_sum;
            auto const sse = (left_sq - left_sum * left_sum / nl) + ((total_sq - left_sq) - right_sum * right_sum / nr);
            if (sse < best.sse - 1e-12) {
                best = { static_cast<int>(f), a + (b - a) / 2.0, sse };
            }
        }
    }
    if (best.feature < 0) {
        return index;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) {
        (x(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    nodes_[index].feature = best.feature;
    nodes_[index].threshold = best.threshold;
    auto const l = Grow(x, y, left, depth + 1, max_depth, min_samples_split, features_per_split, rng);
    auto const r = Grow(x, y, right, depth + 1, max_depth, min_samples_split, features_per_split, rng);
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
}

auto RegressionTree::Predict(std::span<double const> row) const -> double
{
    if (nodes_.empty()) {
        throw TrainingError("regression tree is not fitted");
    }
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        auto const& node = nodes_[i];
        i = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes_[i].value;
}

auto RegressionTree::Depth() const -> std::size_t
{
    if (nodes_.empty()) {
        return 0;
    }
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack { { 0, 0 } };
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (nodes_[i].feature >= 0) {
            stack.emplace_back(nodes_[i].left, d + 1);
            stack.emplace_back(nodes_[i].right, d + 1);
        }
    }
    return deepest;
}

void RegressionForest::Fit(Matrix const& x, std::span<double const> y, ForestOptions const& options)
{
    if (x.Rows() == 0 || x.Rows() != y.size()) {
        throw TrainingError("forest training needs matching non-empty features and targets");
    }
    if (options.trees == 0) {
        throw TrainingError("forest needs at least one tree");
    }
    auto const mtry = options.features_per_split.value_or(
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(x.Cols()))))));
    std::vector<RegressionTree> trees(options.trees);
    ParallelFor(options.trees, options.jobs, [&](std::size_t t) {
        Rng rng(MixSeed(options.seed, t + 1));
        std::vector<std::size_t> rows(x.Rows());
        if (options.bootstrap) {
            for (auto& r : rows) {
                r = rng.Index(x.Rows());
            }
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t { 0 });
        }
        trees[t].Fit(x, y, rows, options.max_depth, options.min_samples_split, mtry, rng);
    });
    trees_ = std::move(trees);
}

void RegressionForest::FitSerial(Matrix const& x, std::span<double const> y, ForestOptions options)
{
    options.jobs = 1;
    Fit(x, y, options);
}

auto RegressionForest::Predict(std::span<double const> row) const -> double
{
    if (trees_.empty()) {
        throw TrainingError("forest is not fitted");
    }
    double sum = 0.0;
    for (auto const& t : trees_) {
        sum += t.Predict(row);
    }
    return sum / static_cast<double>(trees_.size());
}

auto RegressionForest::Predict(Matrix const& x) const -> std::vector<double>
{
    std::vector<double> out(x.Rows());
    for (std::size_t r = 0; r < x.Rows(); ++r) {
        out[r] = Predict(x.Row(r));
    }
    return out;
}

} // namespace evosa
