#ifndef EVOSA_PARALLEL_HPP
#define EVOSA_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evosa {

// jobs <= 0 means "all hardware threads".
inline auto EffectiveJobs(int jobs) -> int
{
#ifdef _OPENMP
    return jobs <= 0 ? omp_get_max_threads() : jobs;
#else
    (void)jobs;
    return 1;
#endif
}

// Runs body(i) for i in [0, n). With jobs == 1 the loop is the plain serial
// reference; otherwise iterations are distributed over an OpenMP team. The
// first exception thrown by any iteration is rethrown after the loop.
template <typename Body>
void ParallelFor(std::size_t n, int jobs, Body&& body)
{
    int const threads = EffectiveJobs(jobs);
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::exception_ptr failure;
    std::mutex guard;
    auto const count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(guard);
            if (!failure) {
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace evosa

#endif
