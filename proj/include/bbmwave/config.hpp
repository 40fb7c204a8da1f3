#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bbmwave/engine.hpp"
#include "bbmwave/model.hpp"
#include "bbmwave/population.hpp"

namespace bbmwave {

// Inputs for the calibrate experiment: a discrete population of size N with
// mutation rate mu and per-mutation advantage s.
struct DiscreteInputs {
    double N = 0.0;
    double mu = 0.0;
    double s = 0.0;
};

// Full description of one batch run. Parsed from JSON; every field has a
// default so a config file only needs the keys it wants to change.
struct ExperimentConfig {
    std::string experiment = "simulate";
    ModelParams params;  // defaults to rho=0.5, beta=0.01, delta=0.5
    ReplicaPlan::Init init = ReplicaPlan::Init::point;
    double init_x = 0.0;
    double edge_u = 4.0;
    Barrier barrier = Barrier::none();
    double horizon = 1.0;
    std::vector<double> snapshot_times;
    std::uint64_t replicas = 1;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    StepPolicy step;
    std::optional<DiscreteInputs> discrete;
};

// Names of the supported experiments, in the order they are documented.
const std::vector<std::string>& experiment_names();

// JSON text -> config. Unknown keys, wrong types, and malformed JSON are
// config_errors naming the offending key.
ExperimentConfig parse_config(const std::string& text);

// Config -> canonical JSON text (sorted keys, 2-space indent). Parsing the
// result reproduces the config exactly.
std::string serialize_config(const ExperimentConfig& config);

// Reads and parses a config file; errors mention the path.
ExperimentConfig load_config_file(const std::string& path);

// Cross-field checks: known experiment, valid params, ordered snapshot
// times within [0, horizon], and the per-experiment preconditions (point
// init for survival and hits, fixed barrier for martingale and hits,
// discrete inputs for calibrate, ...). Throws config_error.
void validate(const ExperimentConfig& config);

// The Monte Carlo plan this config describes.
ReplicaPlan to_plan(const ExperimentConfig& config);

}  // namespace bbmwave
