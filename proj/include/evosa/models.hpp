#ifndef EVOSA_MODELS_HPP
#define EVOSA_MODELS_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "evosa/catalog.hpp"
#include "evosa/dataset.hpp"
#include "evosa/error.hpp"

namespace evosa {

class NumericalError : public Error {
public:
    using Error::Error;
};

// One fitted pipeline stage. Preprocessors map n x d to n x d'; models map
// n x d to an n x 1 prediction column (class labels for classification).
class Step {
public:
    Step() = default;
    Step(Step const&) = default;
    Step(Step&&) = default;
    auto operator=(Step const&) -> Step& = default;
    auto operator=(Step&&) -> Step& = default;
    virtual ~Step() = default;

    virtual void Fit(Matrix const& x, std::span<double const> y) = 0;
    [[nodiscard]] virtual auto Apply(Matrix const& x) const -> Matrix = 0;
};

class ZScoreScaler final : public Step {
public:
    void Fit(Matrix const& x, std::span<double const> y) override;
    [[nodiscard]] auto Apply(Matrix const& x) const -> Matrix override;

private:
    std::vector<double> mean_;
    std::vector<double> scale_;
};

class MinMaxScaler final : public Step {
public:
    void Fit(Matrix const& x, std::span<double const> y) override;
    [[nodiscard]] auto Apply(Matrix const& x) const -> Matrix override;

private:
    std::vector<double> min_;
    std::vector<double> range_;
};

// Keeps the k columns with the largest |Pearson correlation| to the target.
class SelectKBest final : public Step {
public:
    explicit SelectKBest(std::size_t k = 5) : k_(k) { }
    void Fit(Matrix const& x, std::span<double const> y) override;
    [[nodiscard]] auto Apply(Matrix const& x) const -> Matrix override;
    [[nodiscard]] auto Selected() const -> std::vector<std::size_t> const& { return selected_; }

private:
    std::size_t k_;
    std::vector<std::size_t> selected_;
};

// Closed-form ridge with unpenalized intercept; one-vs-rest argmax for classification.
class RidgeModel final : public Step {
public:
    explicit RidgeModel(Task task, double alpha = 1.0) : task_(task), alpha_(alpha) { }
    void Fit(Matrix const& x, std::span<double const> y) override;
    [[nodiscard]] auto Apply(Matrix const& x) const -> Matrix override;

private:
    Task task_;
    double alpha_;
    std::vector<double> x_mean_;
    std::vector<double> classes_;
    std::vector<std::vector<double>> weights_; // one row per output
    std::vector<double> intercepts_;
};

class KnnModel final : public Step {
public:
    KnnModel(Task task, std::size_t k = 5, int jobs = 1) : task_(task), k_(k), jobs_(jobs) { }
    void Fit(Matrix const& x, std::span<double const> y) override;
    [[nodiscard]] auto Apply(Matrix const& x) const -> Matrix override;

private:
    Task task_;
    std::size_t k_;
    int jobs_;
    Matrix train_;
    std::vector<double> target_;
};

// Single-feature threshold split chosen by exhaustive search (SSE for
// regression, misclassification count for classification).
class StumpModel final : public Step {
public:
    explicit StumpModel(Task task) : task_(task) { }
    void Fit(Matrix const& x, std::span<double const> y) override;
    [[nodiscard]] auto Apply(Matrix const& x) const -> Matrix override;

    [[nodiscard]] auto Feature() const -> std::size_t { return feature_; }
    [[nodiscard]] auto Threshold() const -> double { return threshold_; }

private:
    Task task_;
    std::size_t feature_ { 0 };
    double threshold_ { 0.0 };
    double left_ { 0.0 };
    double right_ { 0.0 };
    bool split_ { false };
};

// Serial reference and OpenMP kernels for k-nearest-neighbour prediction.
// Neighbours are ordered by (squared distance, training index); classification
// votes break ties toward the smaller label.
auto KnnPredictSerial(Matrix const& train, std::span<double const> target, Matrix const& query, std::size_t k, Task task) -> std::vector<double>;
auto KnnPredictParallel(Matrix const& train, std::span<double const> target, Matrix const& query, std::size_t k, Task task, int jobs) -> std::vector<double>;

// Solves (A) x = b for symmetric positive definite A (row-major n x n).
// Throws NumericalError when A is not positive definite.
auto CholeskySolve(std::vector<double> a, std::size_t n, std::vector<std::vector<double>> const& rhs) -> std::vector<std::vector<double>>;

// nullptr when the operation has no toy-ML implementation.
auto MakeStep(std::string_view operation, Params const& params, Task task, int jobs = 1) -> std::unique_ptr<Step>;

} // namespace evosa

#endif
