#include "evosa/metrics.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace evosa {

namespace {

    void CheckSizes(std::size_t a, std::size_t b)
    {
        if (a == 0 || a != b) {
            throw std::invalid_argument("metric inputs must be non-empty and of equal length");
        }
    }

    auto ClassF1(std::span<double const> predictions, std::span<double const> labels, long long positive) -> double
    {
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            bool const predicted = std::llround(predictions[i]) == positive;
            bool const actual = std::llround(labels[i]) == positive;
            tp += static_cast<std::size_t>(predicted && actual);
            fp += static_cast<std::size_t>(predicted && !actual);
            fn += static_cast<std::size_t>(!predicted && actual);
        }
        auto const denominator = 2 * tp + fp + fn;
        return denominator == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denominator);
    }

} // namespace

auto MetricF1(std::span<double const> predictions, std::span<double const> labels) -> double
{
    CheckSizes(predictions.size(), labels.size());
    std::set<long long> classes;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        classes.insert(std::llround(labels[i]));
        classes.insert(std::llround(predictions[i]));
    }
    if (classes.size() == 2) {
        return ClassF1(predictions, labels, *classes.rbegin());
    }
    double sum = 0.0;
    for (auto c : classes) {
        sum += ClassF1(predictions, labels, c);
    }
    return sum / static_cast<double>(classes.size());
}

auto MetricR2(std::span<double const> predictions, std::span<double const> targets) -> std::optional<double>
{
    CheckSizes(predictions.size(), targets.size());
    double mean = 0.0;
    for (double t : targets) {
        mean += t;
    }
    mean /= static_cast<double>(targets.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        ss_tot += (targets[i] - mean) * (targets[i] - mean);
        ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
    }
    if (ss_tot <= 0.0) {
        return std::nullopt;
    }
    return 1.0 - ss_res / ss_tot;
}

} // namespace evosa
