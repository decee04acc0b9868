#ifndef EVOSA_FOREST_HPP
#define EVOSA_FOREST_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evosa/dataset.hpp"
#include "evosa/random.hpp"

namespace evosa {

struct ForestOptions {
    std::size_t trees { 50 };
    std::size_t max_depth { 6 };
    std::size_t min_samples_split { 2 };
    std::optional<std::size_t> features_per_split; // default: round(sqrt(cols)), at least 1
    bool bootstrap { true };
    std::uint64_t seed { 0 };
    int jobs { 1 };
};

// CART regression tree minimizing squared error.
class RegressionTree {
public:
    struct Node {
        int feature { -1 }; // -1 marks a leaf
        double threshold { 0.0 };
        std::size_t left { 0 };
        std::size_t right { 0 };
        double value { 0.0 };
    };

    void Fit(Matrix const& x, std::span<double const> y, std::span<std::size_t const> rows,
        std::size_t max_depth, std::size_t min_samples_split, std::size_t features_per_split, Rng& rng);

    [[nodiscard]] auto Predict(std::span<double const> row) const -> double;
    [[nodiscard]] auto Nodes() const -> std::vector<Node> const& { return nodes_; }
    [[nodiscard]] auto Depth() const -> std::size_t;

    friend auto operator==(RegressionTree const& a, RegressionTree const& b) -> bool;

private:
    auto Grow(Matrix const& x, std::span<double const> y, std::vector<std::size_t>& rows, std::size_t depth,
        std::size_t max_depth, std::size_t min_samples_split, std::size_t features_per_split, Rng& rng) -> std::size_t;

    std::vector<Node> nodes_;
};

// Bagged regression trees. Tree t draws from its own stream of the seed, so
// the serial and parallel fits produce the same forest.
class RegressionForest {
public:
    void Fit(Matrix const& x, std::span<double const> y, ForestOptions const& options);
    void FitSerial(Matrix const& x, std::span<double const> y, ForestOptions options);

    [[nodiscard]] auto Predict(std::span<double const> row) const -> double;
    [[nodiscard]] auto Predict(Matrix const& x) const -> std::vector<double>;
    [[nodiscard]] auto Trees() const -> std::vector<RegressionTree> const& { return trees_; }
    [[nodiscard]] auto Fitted() const -> bool { return !trees_.empty(); }

    friend auto operator==(RegressionForest const&, RegressionForest const&) -> bool = default;

private:
    std::vector<RegressionTree> trees_;
};

} // namespace evosa

#endif
