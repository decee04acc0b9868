#include "evosa/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "evosa/parallel.hpp"

namespace evosa {

namespace {

    auto Mean(std::span<double const> v) -> double
    {
        return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    }

    auto ColumnPredictions(std::vector<double> values) -> Matrix
    {
        auto const n = values.size();
        return { n, 1, std::move(values) };
    }

    auto SortedClasses(std::span<double const> y) -> std::vector<double>
    {
        std::vector<double> classes(y.begin(), y.end());
        std::ranges::sort(classes);
        auto [first, last] = std::ranges::unique(classes);
        classes.erase(first, last);
        return classes;
    }

    void RequireFitted(bool fitted, std::size_t expected_cols, Matrix const& x)
    {
        if (!fitted) {
            throw NumericalError("step applied before fit");
        }
        if (x.Cols() != expected_cols) {
            throw NumericalError("column count differs from fit");
        }
    }

} // namespace

void ZScoreScaler::Fit(Matrix const& x, std::span<double const> /*y*/)
{
    mean_.assign(x.Cols(), 0.0);
    scale_.assign(x.Cols(), 1.0);
    for (std::size_t c = 0; c < x.Cols(); ++c) {
        auto col = x.Column(c);
        auto const m = Mean(col);
        double var = 0.0;
        for (double v : col) {
            var += (v - m) * (v - m);
        }
        var /= static_cast<double>(std::max<std::size_t>(col.size(), 1));
        mean_[c] = m;
        scale_[c] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
}

auto ZScoreScaler::Apply(Matrix const& x) const -> Matrix
{
    RequireFitted(!mean_.empty() || x.Cols() == 0, mean_.size(), x);
    Matrix out(x.Rows(), x.Cols());
    for (std::size_t r = 0; r < x.Rows(); ++r) {
        for (std::size_t c = 0; c < x.Cols(); ++c) {
            out(r, c) = (x(r, c) - mean_[c]) / scale_[c];
        }
    }
    return out;
}

void MinMaxScaler::Fit(Matrix const& x, std::span<double const> /*y*/)
{
    min_.assign(x.Cols(), 0.0);
    range_.assign(x.Cols(), 0.0);
    for (std::size_t c = 0; c < x.Cols(); ++c) {
        auto col = x.Column(c);
        auto [lo, hi] = std::ranges::minmax(col);
        min_[c] = lo;
        range_[c] = hi - lo;
    }
}

auto MinMaxScaler::Apply(Matrix const& x) const -> Matrix
{
    RequireFitted(!min_.empty() || x.Cols() == 0, min_.size(), x);
    Matrix out(x.Rows(), x.Cols());
    for (std::size_t r = 0; r < x.Rows(); ++r) {
        for (std::size_t c = 0; c < x.Cols(); ++c) {
            out(r, c) = range_[c] > 0.0 ? (x(r, c) - min_[c]) / range_[c] : 0.0;
        }
    }
    return out;
}

void SelectKBest::Fit(Matrix const& x, std::span<double const> y)
{
    auto const y_mean = Mean(y);
    std::vector<double> score(x.Cols(), 0.0);
    for (std::size_t c = 0; c < x.Cols(); ++c) {
        auto col = x.Column(c);
        auto const m = Mean(col);
        double sxy = 0.0;
        double sxx = 0.0;
        double syy = 0.0;
        for (std::size_t r = 0; r < col.size(); ++r) {
            sxy += (col[r] - m) * (y[r] - y_mean);
            sxx += (col[r] - m) * (col[r] - m);
            syy += (y[r] - y_mean) * (y[r] - y_mean);
        }
        score[c] = (sxx > 0.0 && syy > 0.0) ? std::abs(sxy / std::sqrt(sxx * syy)) : 0.0;
    }
    std::vector<std::size_t> order(x.Cols());
    std::iota(order.begin(), order.end(), 0);
    std::ranges::stable_sort(order, [&](auto a, auto b) { return score[a] > score[b]; });
    order.resize(std::min(k_, order.size()));
    std::ranges::sort(order);
    selected_ = std::move(order);
}

auto SelectKBest::Apply(Matrix const& x) const -> Matrix
{
    return x.SelectColumns(selected_);
}

auto CholeskySolve(std::vector<double> a, std::size_t n, std::vector<std::vector<double>> const& rhs) -> std::vector<std::vector<double>>
{
    // in-place lower factor L with A = L L^T
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) {
            d -= a[j * n + k] * a[j * n + k];
        }
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw NumericalError("matrix is not positive definite");
        }
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    std::vector<std::vector<double>> solutions;
    solutions.reserve(rhs.size());
    for (auto const& b : rhs) {
        std::vector<double> z(b);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < i; ++k) {
                z[i] -= a[i * n + k] * z[k];
            }
            z[i] /= a[i * n + i];
        }
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t k = i + 1; k < n; ++k) {
                z[i] -= a[k * n + i] * z[k];
            }
            z[i] /= a[i * n + i];
        }
        solutions.push_back(std::move(z));
    }
    return solutions;
}

void RidgeModel::Fit(Matrix const& x, std::span<double const> y)
{
    auto const n = x.Rows();
    auto const d = x.Cols();
    x_mean_.assign(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        x_mean_[c] = Mean(x.Column(c));
    }

    std::vector<std::vector<double>> targets;
    if (task_ == Task::Classification) {
        classes_ = SortedClasses(y);
        for (double cls : classes_) {
            std::vector<double> t(n);
            for (std::size_t r = 0; r < n; ++r) {
                t[r] = y[r] == cls ? 1.0 : 0.0;
            }
            targets.push_back(std::move(t));
        }
    } else {
        classes_.clear();
        targets.emplace_back(y.begin(), y.end());
    }

    std::vector<double> gram(d * d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < d; ++i) {
            auto const xi = x(r, i) - x_mean_[i];
            for (std::size_t j = 0; j <= i; ++j) {
                gram[i * d + j] += xi * (x(r, j) - x_mean_[j]);
            }
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            gram[j * d + i] = gram[i * d + j];
        }
        gram[i * d + i] += alpha_;
    }

    std::vector<std::vector<double>> rhs;
    std::vector<double> t_means;
    for (auto const& t : targets) {
        auto const t_mean = Mean(t);
        t_means.push_back(t_mean);
        std::vector<double> b(d, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t i = 0; i < d; ++i) {
                b[i] += (x(r, i) - x_mean_[i]) * (t[r] - t_mean);
            }
        }
        rhs.push_back(std::move(b));
    }
    weights_ = d == 0 ? std::vector<std::vector<double>>(rhs.size()) : CholeskySolve(std::move(gram), d, rhs);
    intercepts_.clear();
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        double b0 = t_means[k];
        for (std::size_t i = 0; i < d; ++i) {
            b0 -= weights_[k][i] * x_mean_[i];
        }
        intercepts_.push_back(b0);
    }
}

auto RidgeModel::Apply(Matrix const& x) const -> Matrix
{
    RequireFitted(!weights_.empty(), x_mean_.size(), x);
    std::vector<double> out(x.Rows());
    for (std::size_t r = 0; r < x.Rows(); ++r) {
        auto score = [&](std::size_t k) {
            double s = intercepts_[k];
            for (std::size_t i = 0; i < x.Cols(); ++i) {
                s += weights_[k][i] * x(r, i);
            }
            return s;
        };
        if (task_ == Task::Regression) {
            out[r] = score(0);
            continue;
        }
        std::size_t best = 0;
        double best_score = score(0);
        for (std::size_t k = 1; k < weights_.size(); ++k) {
            if (auto s = score(k); s > best_score) {
                best_score = s;
                best = k;
            }
        }
        out[r] = classes_[best];
    }
    return ColumnPredictions(std::move(out));
}

namespace {

    auto KnnPredictOne(Matrix const& train, std::span<double const> target, std::span<double const> query, std::size_t k, Task task) -> double
    {
        std::vector<std::pair<double, std::size_t>> dist(train.Rows());
        for (std::size_t i = 0; i < train.Rows(); ++i) {
            double s = 0.0;
            auto row = train.Row(i);
            for (std::size_t c = 0; c < row.size(); ++c) {
                s += (row[c] - query[c]) * (row[c] - query[c]);
            }
            dist[i] = { s, i };
        }
        auto const kk = std::min(k, dist.size());
        std::ranges::partial_sort(dist, dist.begin() + static_cast<std::ptrdiff_t>(kk));
        if (task == Task::Regression) {
            double s = 0.0;
            for (std::size_t i = 0; i < kk; ++i) {
                s += target[dist[i].second];
            }
            return s / static_cast<double>(kk);
        }
        std::map<double, std::size_t> votes;
        for (std::size_t i = 0; i < kk; ++i) {
            ++votes[target[dist[i].second]];
        }
        auto best = votes.begin();
        for (auto it = votes.begin(); it != votes.end(); ++it) {
            if (it->second > best->second) {
                best = it;
            }
        }
        return best->first;
    }

    void CheckKnnInputs(Matrix const& train, std::span<double const> target, Matrix const& query, std::size_t k)
    {
        if (train.Rows() == 0 || k == 0 || target.size() != train.Rows() || query.Cols() != train.Cols()) {
            throw NumericalError("invalid kNN inputs");
        }
    }

} // namespace

auto KnnPredictSerial(Matrix const& train, std::span<double const> target, Matrix const& query, std::size_t k, Task task) -> std::vector<double>
{
    CheckKnnInputs(train, target, query, k);
    std::vector<double> out(query.Rows());
    for (std::size_t r = 0; r < query.Rows(); ++r) {
        out[r] = KnnPredictOne(train, target, query.Row(r), k, task);
    }
    return out;
}

auto KnnPredictParallel(Matrix const& train, std::span<double const> target, Matrix const& query, std::size_t k, Task task, int jobs) -> std::vector<double>
{
    CheckKnnInputs(train, target, query, k);
    std::vector<double> out(query.Rows());
    ParallelFor(query.Rows(), jobs, [&](std::size_t r) {
        out[r] = KnnPredictOne(train, target, query.Row(r), k, task);
    });
    return out;
}

void KnnModel::Fit(Matrix const& x, std::span<double const> y)
{
    train_ = x;
    target_.assign(y.begin(), y.end());
}

auto KnnModel::Apply(Matrix const& x) const -> Matrix
{
    auto predictions = jobs_ == 1 ? KnnPredictSerial(train_, target_, x, k_, task_)
                                  : KnnPredictParallel(train_, target_, x, k_, task_, jobs_);
    return ColumnPredictions(std::move(predictions));
}

void StumpModel::Fit(Matrix const& x, std::span<double const> y)
{
    auto const n = x.Rows();
    if (n == 0) {
        throw NumericalError("cannot fit a stump on zero rows");
    }
    split_ = false;

    if (task_ == Task::Regression) {
        double total = 0.0;
        double total_sq = 0.0;
        for (double v : y) {
            total += v;
            total_sq += v * v;
        }
        auto const mean = total / static_cast<double>(n);
        double best_cost = total_sq - total * mean;
        left_ = right_ = mean;
        for (std::size_t c = 0; c < x.Cols(); ++c) {
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::ranges::stable_sort(order, [&](auto a, auto b) { return x(a, c) < x(b, c); });
            double ls = 0.0;
            double lsq = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                auto const v = y[order[i]];
                ls += v;
                lsq += v * v;
                auto const lo = x(order[i], c);
                auto const hi = x(order[i + 1], c);
                if (!(lo < hi)) {
                    continue;
                }
                auto const nl = static_cast<double>(i + 1);
                auto const nr = static_cast<double>(n - i - 1);
                auto const rs = total - ls;
                auto const rsq = total_sq - lsq;
                auto const cost = (lsq - ls * ls / nl) + (rsq - rs * rs / nr);
                if (cost < best_cost - 1e-12) {
                    best_cost = cost;
                    split_ = true;
                    feature_ = c;
                    threshold_ = 0.5 * (lo + hi);
                    left_ = ls / nl;
                    right_ = rs / nr;
                }
            }
        }
        return;
    }

    auto const classes = SortedClasses(y);
    auto label_index = [&](double v) { return static_cast<std::size_t>(std::ranges::lower_bound(classes, v) - classes.begin()); };
    std::vector<std::size_t> totals(classes.size(), 0);
    for (double v : y) {
        ++totals[label_index(v)];
    }
    // majority label of a count vector, ties toward the smaller label
    auto majority = [&](std::vector<std::size_t> const& counts) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < counts.size(); ++k) {
            if (counts[k] > counts[best]) {
                best = k;
            }
        }
        return best;
    };
    auto const overall = majority(totals);
    std::size_t best_errors = n - totals[overall];
    left_ = right_ = classes[overall];
    for (std::size_t c = 0; c < x.Cols(); ++c) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::ranges::stable_sort(order, [&](auto a, auto b) { return x(a, c) < x(b, c); });
        std::vector<std::size_t> left(classes.size(), 0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            ++left[label_index(y[order[i]])];
            auto const lo = x(order[i], c);
            auto const hi = x(order[i + 1], c);
            if (!(lo < hi)) {
                continue;
            }
            std::vector<std::size_t> right(classes.size());
            for (std::size_t k = 0; k < classes.size(); ++k) {
                right[k] = totals[k] - left[k];
            }
            auto const lm = majority(left);
            auto const rm = majority(right);
            auto const errors = (i + 1 - left[lm]) + (n - i - 1 - right[rm]);
            if (errors < best_errors) {
                best_errors = errors;
                split_ = true;
                feature_ = c;
                threshold_ = 0.5 * (lo + hi);
                left_ = classes[lm];
                right_ = classes[rm];
            }
        }
    }
}

auto StumpModel::Apply(Matrix const& x) const -> Matrix
{
    std::vector<double> out(x.Rows());
    for (std::size_t r = 0; r < x.Rows(); ++r) {
        out[r] = (!split_ || x(r, feature_) <= threshold_) ? left_ : right_;
    }
    return ColumnPredictions(std::move(out));
}

auto MakeStep(std::string_view operation, Params const& params, Task task, int jobs) -> std::unique_ptr<Step>
{
    auto param = [&](std::string const& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (operation == "zscore_scaler") {
        return std::make_unique<ZScoreScaler>();
    }
    if (operation == "minmax_scaler") {
        return std::make_unique<MinMaxScaler>();
    }
    if (operation == "select_k_best") {
        return std::make_unique<SelectKBest>(static_cast<std::size_t>(std::max(1.0, param("k", 5.0))));
    }
    if (operation == "ridge") {
        return std::make_unique<RidgeModel>(task, param("alpha", 1.0));
    }
    if (operation == "knn") {
        return std::make_unique<KnnModel>(task, static_cast<std::size_t>(std::max(1.0, param("k", 5.0))), jobs);
    }
    if (operation == "stump") {
        return std::make_unique<StumpModel>(task);
    }
    return nullptr;
}

} // namespace evosa
