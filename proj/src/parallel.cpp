#include "tubeflow/parallel.hpp"

#include <cstdlib>
#include <omp.h>
#include <string>

namespace tubeflow {

void configure_threads_from_env() {
    const char* v = std::getenv("TUBEFLOW_THREADS");
    if (!v || !*v) return;
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end && *end == '\0' && n > 0) omp_set_num_threads(static_cast<int>(n));
}

int max_threads() { return omp_get_max_threads(); }

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace tubeflow
