#include "tubeflow/acceptance.hpp"
#include "tubeflow/experiments.hpp"
#include "tubeflow/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    tubeflow::configure_threads_from_env();

    CLI::App app{"tube-domain Hessian curvature, Hesse-Koszul flow and transport experiments"};
    app.require_subcommand(1);

    std::string config;
    auto* run = app.add_subcommand("run", "run one experiment config");
    run->add_option("config", config, "INI config file")->required();

    app.add_subcommand("catalog", "list the potential catalog");

    tubeflow::AcceptanceOptions opts;
    std::string out_dir = opts.out_dir.string(), config_dir = opts.config_dir.string();
    auto* verify = app.add_subcommand("verify-all", "run the acceptance suite");
    verify->add_option("--out", out_dir, "directory for outputs")->capture_default_str();
    verify->add_option("--configs", config_dir, "directory holding the shipped configs")->capture_default_str();
    verify->add_option("--only", opts.only, "run only these criteria (1-13)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*run) return tubeflow::run_config(config, std::cout, std::cerr);
    if (app.got_subcommand("catalog")) {
        tubeflow::print_catalog(std::cout);
        return 0;
    }
    opts.out_dir = out_dir;
    opts.config_dir = config_dir;
    try {
        return tubeflow::run_acceptance(opts, std::cout);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
