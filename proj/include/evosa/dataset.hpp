#ifndef EVOSA_DATASET_HPP
#define EVOSA_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evosa {

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows)
        , cols_(cols)
        , data_(rows * cols, fill)
    {
    }
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    [[nodiscard]] auto Rows() const -> std::size_t { return rows_; }
    [[nodiscard]] auto Cols() const -> std::size_t { return cols_; }
    [[nodiscard]] auto operator()(std::size_t r, std::size_t c) const -> double { return data_[r * cols_ + c]; }
    auto operator()(std::size_t r, std::size_t c) -> double& { return data_[r * cols_ + c]; }
    [[nodiscard]] auto Row(std::size_t r) const -> std::span<double const> { return { data_.data() + r * cols_, cols_ }; }
    [[nodiscard]] auto Column(std::size_t c) const -> std::vector<double>;
    [[nodiscard]] auto Data() const -> std::vector<double> const& { return data_; }

    [[nodiscard]] auto SelectRows(std::span<std::size_t const> rows) const -> Matrix;
    [[nodiscard]] auto SelectColumns(std::span<std::size_t const> cols) const -> Matrix;
    // Column-wise concatenation; all blocks must have the same row count.
    static auto HorizontalConcat(std::span<Matrix const* const> blocks) -> Matrix;

    friend auto operator==(Matrix const&, Matrix const&) -> bool = default;

private:
    std::size_t rows_ { 0 };
    std::size_t cols_ { 0 };
    std::vector<double> data_;
};

enum class Task { Classification, Regression };

auto ToString(Task task) -> std::string_view;
auto ParseTask(std::string_view text) -> std::optional<Task>;

// Immutable tabular dataset. Construction enforces: finite values, at least
// 10 rows, target length equal to row count, integer classification labels.
class Dataset {
public:
    static constexpr std::size_t kMinRows = 10;

    Dataset(Matrix features, std::vector<double> target, Task task, std::string name);

    [[nodiscard]] auto Features() const -> Matrix const& { return features_; }
    [[nodiscard]] auto Target() const -> std::vector<double> const& { return target_; }
    [[nodiscard]] auto GetTask() const -> Task { return task_; }
    [[nodiscard]] auto Name() const -> std::string const& { return name_; }
    [[nodiscard]] auto Rows() const -> std::size_t { return features_.Rows(); }

private:
    Matrix features_;
    std::vector<double> target_;
    Task task_;
    std::string name_;
};

struct CsvLoadResult {
    Dataset dataset;
    std::size_t dropped_rows { 0 };
};

// Comma-separated, header row first, optional double quotes. A column is
// numeric when most of its non-empty cells parse as numbers; other columns are
// label-encoded in order of first appearance. Rows with missing cells, wrong
// arity, or non-numeric values in numeric columns are dropped and counted.
// Throws DataError for a missing file or column or too few usable rows.
auto LoadCsv(std::filesystem::path const& path, std::string_view target_column, Task task) -> CsvLoadResult;
auto ParseCsv(std::string_view text, std::string_view target_column, Task task, std::string name) -> CsvLoadResult;

// Seeded toy datasets used by tests and benchmarks.
// y = 3 x1 + N(0, noise) with x uniform in [-1, 1].
auto MakeLinearRegression(std::uint64_t seed, std::size_t rows = 200, std::size_t features = 3, double noise = 0.01) -> Dataset;
// Binary labels = [x1 > 0.5] with a 0.05 margin around the boundary.
auto MakeSeparableClassification(std::uint64_t seed, std::size_t rows = 100, std::size_t features = 2) -> Dataset;

} // namespace evosa

#endif
