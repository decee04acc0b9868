#include "evosa/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "evosa/error.hpp"
#include "evosa/random.hpp"

namespace evosa {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows)
    , cols_(cols)
    , data_(std::move(data))
{
    if (data_.size() != rows * cols) {
        throw DataError("matrix data size does not match shape");
    }
}

auto Matrix::Column(std::size_t c) const -> std::vector<double>
{
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        out[r] = (*this)(r, c);
    }
    return out;
}

auto Matrix::SelectRows(std::span<std::size_t const> rows) const -> Matrix
{
    Matrix out(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::ranges::copy(Row(rows[i]), out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }
    return out;
}

auto Matrix::SelectColumns(std::span<std::size_t const> cols) const -> Matrix
{
    Matrix out(rows_, cols.size());
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(r, j) = (*this)(r, cols[j]);
        }
    }
    return out;
}

auto Matrix::HorizontalConcat(std::span<Matrix const* const> blocks) -> Matrix
{
    if (blocks.empty()) {
        return {};
    }
    auto const rows = blocks.front()->Rows();
    std::size_t cols = 0;
    for (auto const* b : blocks) {
        if (b->Rows() != rows) {
            throw DataError("row count mismatch in concatenation");
        }
        cols += b->Cols();
    }
    Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t offset = 0;
        for (auto const* b : blocks) {
            for (std::size_t c = 0; c < b->Cols(); ++c) {
                out(r, offset + c) = (*b)(r, c);
            }
            offset += b->Cols();
        }
    }
    return out;
}

auto ToString(Task task) -> std::string_view
{
    return task == Task::Classification ? "classification" : "regression";
}

auto ParseTask(std::string_view text) -> std::optional<Task>
{
    if (text == "classification") {
        return Task::Classification;
    }
    if (text == "regression") {
        return Task::Regression;
    }
    return std::nullopt;
}

Dataset::Dataset(Matrix features, std::vector<double> target, Task task, std::string name)
    : features_(std::move(features))
    , target_(std::move(target))
    , task_(task)
    , name_(std::move(name))
{
    if (features_.Rows() < kMinRows) {
        throw DataError("too few rows: " + std::to_string(features_.Rows()) + " (need at least " + std::to_string(kMinRows) + ")");
    }
    if (target_.size() != features_.Rows()) {
        throw DataError("target length does not match row count");
    }
    if (!std::ranges::all_of(features_.Data(), [](double v) { return std::isfinite(v); })
        || !std::ranges::all_of(target_, [](double v) { return std::isfinite(v); })) {
        throw DataError("dataset contains non-finite values");
    }
    if (task_ == Task::Classification && !std::ranges::all_of(target_, [](double v) { return v == std::round(v); })) {
        throw DataError("classification targets must be integer labels");
    }
}

namespace {

    auto SplitCsvLine(std::string_view line) -> std::vector<std::string>
    {
        std::vector<std::string> fields;
        std::string current;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char const c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    current += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(current));
                current.clear();
            } else {
                current += c;
            }
        }
        fields.push_back(std::move(current));
        for (auto& f : fields) {
            auto const first = f.find_first_not_of(" \t");
            auto const last = f.find_last_not_of(" \t");
            f = first == std::string::npos ? std::string {} : f.substr(first, last - first + 1);
        }
        return fields;
    }

    auto ParseNumber(std::string const& text) -> std::optional<double>
    {
        if (text.empty()) {
            return std::nullopt;
        }
        double value = 0.0;
        auto const* begin = text.data();
        auto const* end = text.data() + text.size();
        if (*begin == '+') {
            ++begin;
        }
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc {} || ptr != end || !std::isfinite(value)) {
            return std::nullopt;
        }
        return value;
    }

} // namespace

auto ParseCsv(std::string_view text, std::string_view target_column, Task task, std::string name) -> CsvLoadResult
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in { std::string(text) };
    std::string line;
    bool header_seen = false;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!header_seen) {
            if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
                line.erase(0, 3); // UTF-8 byte order mark
            }
            header = SplitCsvLine(line);
            header_seen = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        rows.push_back(SplitCsvLine(line));
    }
    if (!header_seen) {
        throw DataError("empty CSV input");
    }
    auto target_it = std::ranges::find(header, target_column);
    if (target_it == header.end()) {
        throw DataError("target column '" + std::string(target_column) + "' not found");
    }
    auto const target_index = static_cast<std::size_t>(target_it - header.begin());
    auto const width = header.size();

    std::size_t dropped = 0;
    std::vector<std::vector<std::string>> complete;
    for (auto& row : rows) {
        if (row.size() != width || std::ranges::any_of(row, [](auto const& f) { return f.empty(); })) {
            ++dropped;
            continue;
        }
        complete.push_back(std::move(row));
    }

    std::vector<bool> numeric(width, true);
    for (std::size_t c = 0; c < width; ++c) {
        std::size_t parsed = 0;
        for (auto const& row : complete) {
            parsed += ParseNumber(row[c]).has_value() ? 1 : 0;
        }
        numeric[c] = complete.empty() || 2 * parsed > complete.size();
    }
    if (task == Task::Regression && !numeric[target_index]) {
        throw DataError("regression target '" + std::string(target_column) + "' is not numeric");
    }

    std::vector<std::map<std::string, double>> codes(width);
    std::vector<double> features;
    std::vector<double> target;
    for (auto const& row : complete) {
        std::vector<double> values(width);
        bool ok = true;
        for (std::size_t c = 0; c < width && ok; ++c) {
            if (numeric[c]) {
                auto v = ParseNumber(row[c]);
                ok = v.has_value();
                values[c] = v.value_or(0.0);
            } else {
                auto [it, inserted] = codes[c].try_emplace(row[c], static_cast<double>(codes[c].size()));
                values[c] = it->second;
            }
        }
        if (!ok || (task == Task::Classification && values[target_index] != std::round(values[target_index]))) {
            ++dropped;
            continue;
        }
        for (std::size_t c = 0; c < width; ++c) {
            if (c == target_index) {
                target.push_back(values[c]);
            } else {
                features.push_back(values[c]);
            }
        }
    }
    auto const n = target.size();
    if (n < Dataset::kMinRows) {
        throw DataError("too few rows: " + std::to_string(n) + " usable (need at least " + std::to_string(Dataset::kMinRows) + ")");
    }
    Matrix matrix(n, width - 1, std::move(features));
    return { Dataset(std::move(matrix), std::move(target), task, std::move(name)), dropped };
}

auto LoadCsv(std::filesystem::path const& path, std::string_view target_column, Task task) -> CsvLoadResult
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open dataset file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return ParseCsv(buffer.str(), target_column, task, path.stem().string());
}

auto MakeLinearRegression(std::uint64_t seed, std::size_t rows, std::size_t features, double noise) -> Dataset
{
    Rng rng(MixSeed(seed, 11));
    Matrix x(rows, features);
    std::vector<double> y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < features; ++c) {
            x(r, c) = rng.Uniform(-1.0, 1.0);
        }
        y[r] = 3.0 * x(r, 0) + rng.Normal(0.0, noise);
    }
    return { std::move(x), std::move(y), Task::Regression, "linear" };
}

auto MakeSeparableClassification(std::uint64_t seed, std::size_t rows, std::size_t features) -> Dataset
{
    Rng rng(MixSeed(seed, 13));
    Matrix x(rows, features);
    std::vector<double> y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < features; ++c) {
            x(r, c) = rng.Uniform01();
        }
        while (std::abs(x(r, 0) - 0.5) < 0.05) {
            x(r, 0) = rng.Uniform01();
        }
        y[r] = x(r, 0) > 0.5 ? 1.0 : 0.0;
    }
    return { std::move(x), std::move(y), Task::Classification, "separable" };
}

} // namespace evosa
