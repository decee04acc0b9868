#ifndef EVOSA_METRICS_HPP
#define EVOSA_METRICS_HPP

#include <optional>
#include <span>

namespace evosa {

// F1 of the larger label for two classes; macro-averaged over the union of
// observed labels otherwise. Classes without predictions or support score 0.
// Throws std::invalid_argument on empty or mismatched inputs.
auto MetricF1(std::span<double const> predictions, std::span<double const> labels) -> double;

// 1 - SS_res / SS_tot; nullopt when the targets have zero variance.
auto MetricR2(std::span<double const> predictions, std::span<double const> targets) -> std::optional<double>;

} // namespace evosa

#endif
