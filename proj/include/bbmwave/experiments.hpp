#pragma once

#include "bbmwave/config.hpp"

namespace bbmwave {

// Exit status contract shared with the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

// Runs one experiment. Writes manifest.json into config.out_dir before any
// computation (wall_time_s null until the run finishes), then the
// experiment's CSVs, then metrics.json through a temp-file rename, and
// finally the manifest again with the wall time filled in. Returns kExitOk,
// kExitUsage for validation failures, or kExitNumeric for numeric, capacity
// and I/O failures; error text goes to stderr. Never throws.
int run_experiment(const ExperimentConfig& config);

}  // namespace bbmwave
