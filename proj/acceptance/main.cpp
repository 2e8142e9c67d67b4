#include "tubeflow/acceptance.hpp"
#include "tubeflow/parallel.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

// Usage: tubeflow_acceptance [out_dir] [criterion ...]
int main(int argc, char** argv) {
    tubeflow::configure_threads_from_env();
    tubeflow::AcceptanceOptions opts;
    if (argc > 1) opts.out_dir = argv[1];
    for (int i = 2; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
    return tubeflow::run_acceptance(opts, std::cout);
}
