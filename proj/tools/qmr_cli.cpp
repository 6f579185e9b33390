#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qmr/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qmr: optimal execution under transient impact with market resistance"};
    app.footer("Experiments: round_trip, mi_profile, gamma_scaling, linear_check, "
               "convergence_report, sensitivity_sweep");

    std::string config_path;
    std::string experiment;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool have_seed = false;
    bool quiet = false;

    app.add_option("--config", config_path, "Path to the JSON experiment config")->required();
    app.add_option("--experiment", experiment, "Override the experiment kind");
    app.add_option("--seed", seed, "Override the Monte Carlo seed")->each([&](const std::string&) {
        have_seed = true;
    });
    app.add_option("--out", out_dir, "Override the output directory");
    app.add_flag("--quiet", quiet, "Suppress the summary printout");

    if (argc <= 1) {
        std::cerr << app.help() << std::endl;
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) {
            std::cerr << e.what() << "\n" << app.help() << std::endl;
            return 2;
        }
        return app.exit(e);  // --help and friends
    }

    try {
        qmr::ExperimentConfig cfg = qmr::load_config(config_path);
        if (!experiment.empty()) {
            cfg.experiment = experiment;
            cfg.validate();
        }
        if (have_seed) cfg.mc.seed = seed;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        const qmr::RunResult run = qmr::run_experiment(cfg);
        if (!quiet) std::cout << run.summary.dump(2) << std::endl;
        return run.exit_code;
    } catch (const qmr::ConfigError& e) {
        std::cerr << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
