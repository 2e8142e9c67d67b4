#pragma once

#include "tubeflow/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tubeflow {

struct ExperimentResult {
    std::string kind;
    bool pass = true;
    std::string verdict;                // one line
    std::vector<std::string> failures;  // each with a serialized witness
    std::vector<std::filesystem::path> outputs;
};

const std::vector<std::string>& experiment_kinds();

// Throws ConfigError, UnknownName, BadParams or ParseError on bad input.
ExperimentResult run_experiment(const Config& cfg);

// 0 when every asserted property passes, 1 when one fails, 2 on a usage or
// config error. Prints the one-line verdict to out.
int run_config(const std::filesystem::path& path, std::ostream& out, std::ostream& err);

void print_catalog(std::ostream& out);

}  // namespace tubeflow
