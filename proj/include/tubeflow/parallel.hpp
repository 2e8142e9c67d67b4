#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>

namespace tubeflow {

// Serial is the reference path; Parallel runs the same per-item work under
// OpenMP. Reductions are always done serially over per-item results, so both
// paths produce bit-identical output.
enum class Exec { Serial, Parallel };

// Reads TUBEFLOW_THREADS once and applies it to the OpenMP runtime.
void configure_threads_from_env();
int max_threads();

uint64_t splitmix64(uint64_t x);
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x9e3779b97f4a7c15ULL));
}

// Runs body(i) for i in [0, count). In parallel mode the exception raised by
// the lowest failing index is rethrown, matching what the serial loop reports.
template <class F>
void for_each_index(Exec exec, std::ptrdiff_t count, F&& body) {
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::mutex guard;
    std::exception_ptr first;
    std::ptrdiff_t first_index = std::numeric_limits<std::ptrdiff_t>::max();
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (i < first_index) {
                first_index = i;
                first = std::current_exception();
            }
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace tubeflow
