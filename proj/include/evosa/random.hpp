#ifndef EVOSA_RANDOM_HPP
#define EVOSA_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <utility>

namespace evosa {

// splitmix64 finalizer; used to derive independent stream seeds.
constexpr auto MixSeed(std::uint64_t seed, std::uint64_t stream = 0) noexcept -> std::uint64_t
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31U);
}

// Deterministic generator. All draws are implemented here rather than through
// std:: distributions so streams are identical across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) { }

    static constexpr auto min() -> result_type { return std::mt19937_64::min(); }
    static constexpr auto max() -> result_type { return std::mt19937_64::max(); }
    auto operator()() -> result_type { return engine_(); }

    // uniform in [0, 1)
    auto Uniform01() -> double { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }

    auto Uniform(double lo, double hi) -> double { return lo + (hi - lo) * Uniform01(); }

    // uniform integer in [0, n); n must be > 0
    auto Index(std::size_t n) -> std::size_t
    {
        auto const bound = static_cast<std::uint64_t>(n);
        auto const limit = max() - (max() % bound);
        std::uint64_t x = 0;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    auto Bernoulli(double p) -> bool { return Uniform01() < p; }

    auto Normal(double mean = 0.0, double sigma = 1.0) -> double
    {
        double u1 = 0.0;
        do {
            u1 = Uniform01();
        } while (u1 <= 0.0);
        double const u2 = Uniform01();
        return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <typename T>
    void Shuffle(std::span<T> values)
    {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[Index(i)]);
        }
    }

    // Seed for a child generator; advances this generator.
    auto Fork() -> std::uint64_t { return MixSeed(engine_()); }

private:
    std::mt19937_64 engine_;
};

} // namespace evosa

#endif
