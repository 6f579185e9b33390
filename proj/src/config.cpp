#include "qmr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace qmr {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError("config: expected an object at '" + path + "'");
    for (const auto& item : j.items()) {
        if (allowed.find(item.key()) == allowed.end())
            throw ConfigError("config: unknown key '" + (path.empty() ? item.key() : path + "." + item.key()) + "'");
    }
}

template <typename T>
void read(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: invalid value type at '" + path + "." + key + "'");
    }
}

[[noreturn]] void invalid(const std::string& key_path, const std::string& why) {
    throw ConfigError("config: invalid value at '" + key_path + "': " + why);
}

}  // namespace

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.scheme.kernel = {1.0, 0.467, 0.614};
    cfg.scheme.gamma = 0.2;
    cfg.scheme.penalty = {0.0, 500.0};
    cfg.scheme.resistance = {ResistanceFn::Variant::huberized_power, 2.0, 1e6, 0.5};
    cfg.scheme.x0 = 0.0;
    cfg.signal = {10.0, 1.0, 1.0, 1.0};
    return cfg;
}

void ExperimentConfig::validate() const {
    static const std::set<std::string> kinds{"round_trip",   "mi_profile",         "gamma_scaling",
                                            "linear_check",  "convergence_report", "sensitivity_sweep"};
    if (kinds.find(experiment) == kinds.end()) invalid("experiment", "unknown experiment kind '" + experiment + "'");
    if (!(grid.horizon > 0.0)) invalid("grid.T", "must be positive");
    if (grid.steps < 1) invalid("grid.N", "must be a positive integer");
    if (!(scheme.gamma > 0.0)) invalid("impact.gamma", "must be positive");
    if (scheme.kernel.lambda < 0.0) invalid("impact.lambda", "must be >= 0");
    if (scheme.kernel.kappa_inf < 0.0) invalid("impact.kappa_inf", "must be >= 0");
    if (!(scheme.kernel.nu >= 0.5 && scheme.kernel.nu < 1.0))
        invalid("impact.nu", "must lie in [0.5, 1) for the solver discretization");
    if (!(scheme.resistance.c >= 1.0)) invalid("resistance.c", "must be >= 1");
    if (!(scheme.resistance.delta > 0.0)) invalid("resistance.delta", "must be positive");
    if (scheme.resistance.slope < 0.0) invalid("resistance.a", "must be >= 0");
    if (scheme.penalty.phi < 0.0) invalid("penalties.phi", "must be >= 0");
    if (scheme.penalty.varrho < 0.0) invalid("penalties.varrho", "must be >= 0");
    if (!(signal.kappa > 0.0)) invalid("signal.kappa", "must be positive");
    if (signal.sigma < 0.0) invalid("signal.sigma", "must be >= 0");
    if (mc.paths < 1) invalid("mc.M", "must be a positive integer");
    if (mc.ridge_penalty < 0.0) invalid("mc.ridge_penalty", "must be >= 0");
    if (!(scheme.eps1 > 0.0)) invalid("scheme.eps1", "must be positive");
    if (!(scheme.eps2 > 0.0)) invalid("scheme.eps2", "must be positive");
    if (scheme.max_outer < 1) invalid("scheme.max_outer", "must be a positive integer");
    if (!(profile.rate > 0.0)) invalid("profile.rate", "must be positive");
    if (!(profile.t_end > 0.0)) invalid("profile.t_end", "must be positive");
    if (profile.window < profile.t_end) invalid("profile.window", "must cover profile.t_end");
    if (profile.steps < 1) invalid("profile.steps", "must be a positive integer");
    if (!(gammas.min > 0.0)) invalid("gammas.min", "must be positive");
    if (!(gammas.max >= gammas.min)) invalid("gammas.max", "must be >= gammas.min");
    if (gammas.count < 3) invalid("gammas.count", "must be at least 3");
    if (output_dir.empty()) invalid("output_dir", "must not be empty");
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg = default_config();
    check_keys(j, "", {"experiment", "grid", "impact", "resistance", "penalties", "signal", "mc",
                       "scheme", "profile", "gammas", "output_dir"});
    read(j, "", "experiment", cfg.experiment);
    read(j, "", "output_dir", cfg.output_dir);
    if (j.contains("grid")) {
        const json& s = j.at("grid");
        check_keys(s, "grid", {"T", "N"});
        read(s, "grid", "T", cfg.grid.horizon);
        read(s, "grid", "N", cfg.grid.steps);
    }
    if (j.contains("impact")) {
        const json& s = j.at("impact");
        check_keys(s, "impact", {"gamma", "lambda", "nu", "kappa_inf"});
        read(s, "impact", "gamma", cfg.scheme.gamma);
        read(s, "impact", "lambda", cfg.scheme.kernel.lambda);
        read(s, "impact", "nu", cfg.scheme.kernel.nu);
        read(s, "impact", "kappa_inf", cfg.scheme.kernel.kappa_inf);
    }
    if (j.contains("resistance")) {
        const json& s = j.at("resistance");
        check_keys(s, "resistance", {"variant", "c", "delta", "a"});
        std::string variant = "huberized_power";
        read(s, "resistance", "variant", variant);
        if (variant == "huberized_power")
            cfg.scheme.resistance.variant = ResistanceFn::Variant::huberized_power;
        else if (variant == "linear")
            cfg.scheme.resistance.variant = ResistanceFn::Variant::linear;
        else if (variant == "zero")
            cfg.scheme.resistance.variant = ResistanceFn::Variant::zero;
        else
            invalid("resistance.variant", "must be huberized_power, linear, or zero");
        read(s, "resistance", "c", cfg.scheme.resistance.c);
        read(s, "resistance", "delta", cfg.scheme.resistance.delta);
        read(s, "resistance", "a", cfg.scheme.resistance.slope);
    }
    if (j.contains("penalties")) {
        const json& s = j.at("penalties");
        check_keys(s, "penalties", {"phi", "varrho"});
        read(s, "penalties", "phi", cfg.scheme.penalty.phi);
        read(s, "penalties", "varrho", cfg.scheme.penalty.varrho);
    }
    if (j.contains("signal")) {
        const json& s = j.at("signal");
        check_keys(s, "signal", {"eta", "kappa", "sigma", "mu0"});
        read(s, "signal", "eta", cfg.signal.eta);
        read(s, "signal", "kappa", cfg.signal.kappa);
        read(s, "signal", "sigma", cfg.signal.sigma);
        read(s, "signal", "mu0", cfg.signal.mu0);
    }
    if (j.contains("mc")) {
        const json& s = j.at("mc");
        check_keys(s, "mc", {"M", "seed", "ridge_penalty"});
        read(s, "mc", "M", cfg.mc.paths);
        read(s, "mc", "seed", cfg.mc.seed);
        read(s, "mc", "ridge_penalty", cfg.mc.ridge_penalty);
    }
    if (j.contains("scheme")) {
        const json& s = j.at("scheme");
        check_keys(s, "scheme", {"eps1", "eps2", "eps_bf", "max_outer", "x0"});
        read(s, "scheme", "eps1", cfg.scheme.eps1);
        read(s, "scheme", "eps2", cfg.scheme.eps2);
        double eps_bf = 1e-31;  // reporting threshold only; accepted for round-tripping
        read(s, "scheme", "eps_bf", eps_bf);
        read(s, "scheme", "max_outer", cfg.scheme.max_outer);
        read(s, "scheme", "x0", cfg.scheme.x0);
    }
    if (j.contains("profile")) {
        const json& s = j.at("profile");
        check_keys(s, "profile", {"rate", "t_end", "window", "steps"});
        read(s, "profile", "rate", cfg.profile.rate);
        read(s, "profile", "t_end", cfg.profile.t_end);
        read(s, "profile", "window", cfg.profile.window);
        read(s, "profile", "steps", cfg.profile.steps);
    }
    if (j.contains("gammas")) {
        const json& s = j.at("gammas");
        check_keys(s, "gammas", {"min", "max", "count"});
        read(s, "gammas", "min", cfg.gammas.min);
        read(s, "gammas", "max", cfg.gammas.max);
        read(s, "gammas", "count", cfg.gammas.count);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        j = json::object();  // empty file means all defaults
    } else {
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config: parse error: ") + e.what());
        }
    }
    return config_from_json(j);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    const char* variant = "zero";
    if (cfg.scheme.resistance.variant == ResistanceFn::Variant::huberized_power) variant = "huberized_power";
    if (cfg.scheme.resistance.variant == ResistanceFn::Variant::linear) variant = "linear";
    return json{
        {"experiment", cfg.experiment},
        {"grid", {{"T", cfg.grid.horizon}, {"N", cfg.grid.steps}}},
        {"impact",
         {{"gamma", cfg.scheme.gamma},
          {"lambda", cfg.scheme.kernel.lambda},
          {"nu", cfg.scheme.kernel.nu},
          {"kappa_inf", cfg.scheme.kernel.kappa_inf}}},
        {"resistance",
         {{"variant", variant},
          {"c", cfg.scheme.resistance.c},
          {"delta", cfg.scheme.resistance.delta},
          {"a", cfg.scheme.resistance.slope}}},
        {"penalties", {{"phi", cfg.scheme.penalty.phi}, {"varrho", cfg.scheme.penalty.varrho}}},
        {"signal",
         {{"eta", cfg.signal.eta},
          {"kappa", cfg.signal.kappa},
          {"sigma", cfg.signal.sigma},
          {"mu0", cfg.signal.mu0}}},
        {"mc", {{"M", cfg.mc.paths}, {"seed", cfg.mc.seed}, {"ridge_penalty", cfg.mc.ridge_penalty}}},
        {"scheme",
         {{"eps1", cfg.scheme.eps1},
          {"eps2", cfg.scheme.eps2},
          {"max_outer", cfg.scheme.max_outer},
          {"x0", cfg.scheme.x0}}},
        {"profile",
         {{"rate", cfg.profile.rate},
          {"t_end", cfg.profile.t_end},
          {"window", cfg.profile.window},
          {"steps", cfg.profile.steps}}},
        {"gammas", {{"min", cfg.gammas.min}, {"max", cfg.gammas.max}, {"count", cfg.gammas.count}}},
        {"output_dir", cfg.output_dir},
    };
}

}  // namespace qmr
