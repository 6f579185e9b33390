#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "qmr/foc.hpp"
#include "qmr/signals.hpp"

namespace qmr {

struct GridConfig {
    double horizon = 1.0;
    int steps = 100;
};

struct McConfig {
    int paths = 2000;
    std::uint64_t seed = 1;
    double ridge_penalty = 1e-5;
};

struct ProfileConfig {
    double rate = 0.3;
    double t_end = 1.0;
    double window = 2.0;
    int steps = 400;
};

struct GammaGridConfig {
    double min = 1.0;
    double max = 100.0;
    int count = 15;
};

/// Full experiment description. Field defaults are the reference parameter
/// set; every config file key is optional and unknown keys are rejected with
/// their full path.
struct ExperimentConfig {
    std::string experiment = "round_trip";
    GridConfig grid;
    SchemeConfig scheme;   // impact kernel, penalties, response map, tolerances
    OUParams signal;
    McConfig mc;
    ProfileConfig profile;
    GammaGridConfig gammas;
    std::string output_dir = "out";

    void validate() const;
};

ExperimentConfig default_config();

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace qmr
