#pragma once

#include <json.hpp>

#include "qmr/config.hpp"

namespace qmr {

struct RunResult {
    int exit_code = 0;           // 0 ok, 1 solver non-convergence
    nlohmann::json summary;
};

/// Run the configured experiment, writing trajectories, a convergence log, and
/// a machine-readable summary into cfg.output_dir. Artifacts are written even
/// when the solver fails to converge (signalled via exit_code).
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace qmr
