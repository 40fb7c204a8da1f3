#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bbmwave/config.hpp"
#include "bbmwave/errors.hpp"
#include "bbmwave/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"branching Brownian motion laboratory"};
    app.name("bbmwave");

    std::string experiment;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::uint64_t replicas = 0;

    app.add_option("experiment", experiment,
                   "experiment to run (overrides the config file)")
        ->check(CLI::IsMember(bbmwave::experiment_names()));
    app.add_option("--config", config_path, "JSON config file")
        ->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "master RNG seed");
    app.add_option("--out", out_dir, "output directory");
    auto* rep_opt =
        app.add_option("--replicas", replicas, "number of replicas");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? bbmwave::kExitOk : bbmwave::kExitUsage;
    }

    try {
        bbmwave::ExperimentConfig config;
        if (!config_path.empty()) config = bbmwave::load_config_file(config_path);
        if (!experiment.empty()) config.experiment = experiment;
        if (seed_opt->count() > 0) config.seed = seed;
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (rep_opt->count() > 0) config.replicas = replicas;
        if (config.experiment.empty()) {
            std::cerr << "bbmwave: no experiment named (positional argument "
                         "or \"experiment\" key in the config)\n";
            return bbmwave::kExitUsage;
        }
        return bbmwave::run_experiment(config);
    } catch (const bbmwave::config_error& e) {
        std::cerr << "bbmwave: " << e.what() << '\n';
        return bbmwave::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "bbmwave: " << e.what() << '\n';
        return bbmwave::kExitNumeric;
    }
}
