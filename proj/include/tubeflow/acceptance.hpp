#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tubeflow {

struct AcceptanceOptions {
    std::filesystem::path out_dir = "acceptance_out";
    std::filesystem::path config_dir;  // empty: the configs shipped with the source tree
    std::vector<int> only;             // empty: all criteria
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs the criteria, printing one PASS/FAIL line per criterion as it finishes.
std::vector<CriterionResult> run_criteria(const AcceptanceOptions& opts, std::ostream& out);

// 0 when every selected criterion passes, 1 otherwise.
int run_acceptance(const AcceptanceOptions& opts, std::ostream& out);

std::filesystem::path default_config_dir();

}  // namespace tubeflow
