#include "qmr/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <vector>

#include "qmr/analysis.hpp"
#include "qmr/lsmc.hpp"

namespace qmr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_tag(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

struct PathStats {
    std::vector<double> mean, ci;
};

PathStats stats(const PathSet& p) {
    const int nodes = p.nodes();
    const int paths = p.paths();
    PathStats s;
    s.mean.assign(static_cast<std::size_t>(nodes), 0.0);
    s.ci.assign(static_cast<std::size_t>(nodes), 0.0);
    for (int i = 0; i < nodes; ++i) {
        double mean = 0.0;
        for (int m = 0; m < paths; ++m) mean += p.at(m, i);
        mean /= paths;
        double var = 0.0;
        for (int m = 0; m < paths; ++m) {
            const double d = p.at(m, i) - mean;
            var += d * d;
        }
        var /= paths;
        s.mean[static_cast<std::size_t>(i)] = mean;
        s.ci[static_cast<std::size_t>(i)] = 1.96 * std::sqrt(var / paths);
    }
    return s;
}

void write_trajectories(const fs::path& file, const TimeGrid& grid,
                        const std::vector<std::pair<std::string, const PathSet*>>& quantities) {
    std::ofstream out(file);
    const int samples = std::min(5, quantities.front().second->paths());
    out << "t";
    for (const auto& [name, p] : quantities) {
        (void)p;
        out << "," << name << "_mean," << name << "_ci";
        for (int s = 0; s < samples; ++s) out << "," << name << "_s" << s;
    }
    out << "\n";
    std::vector<PathStats> st;
    st.reserve(quantities.size());
    for (const auto& [name, p] : quantities) {
        (void)name;
        st.push_back(stats(*p));
    }
    for (int i = 0; i <= grid.steps(); ++i) {
        out << fmt_num(grid.node(i));
        for (std::size_t q = 0; q < quantities.size(); ++q) {
            out << "," << fmt_num(st[q].mean[static_cast<std::size_t>(i)]) << ","
                << fmt_num(st[q].ci[static_cast<std::size_t>(i)]);
            for (int s = 0; s < samples; ++s) out << "," << fmt_num(quantities[q].second->at(s, i));
        }
        out << "\n";
    }
}

void write_convergence_log(const fs::path& file, const std::vector<IterationRecord>& history) {
    std::ofstream out(file);
    out << "iter e1 e2 ebf wall_seconds\n";
    for (const auto& rec : history)
        out << rec.iter << " " << fmt_num(rec.e1) << " " << fmt_num(rec.e2) << " " << fmt_num(rec.ebf)
            << " " << fmt_num(rec.seconds) << "\n";
}

void write_summary(const fs::path& file, const json& summary) {
    std::ofstream out(file);
    out << summary.dump(2) << "\n";
}

json history_tail(const std::vector<IterationRecord>& history) {
    if (history.empty()) return json::object();
    const auto& last = history.back();
    return json{{"iterations", last.iter}, {"e1", last.e1}, {"e2", last.e2}, {"ebf", last.ebf},
                {"wall_seconds", last.seconds}};
}

double peak_abs_mean(const PathSet& p) {
    const PathStats s = stats(p);
    double peak = 0.0;
    for (double v : s.mean) peak = std::max(peak, std::abs(v));
    return peak;
}

struct SolvedRun {
    PathSet alpha;
    SchemeResult result;
    std::unique_ptr<CondExpProvider> ce;
    const RegressionCondExp* regression = nullptr;  // non-null when stochastic
};

SolvedRun solve_scheme_run(const ExperimentConfig& cfg, const SchemeOperators& ops) {
    const TimeGrid& grid = ops.grid;
    const bool stochastic = cfg.signal.sigma > 0.0;
    const int paths = stochastic ? cfg.mc.paths : 1;
    const PathSet mu = simulate_mu(cfg.signal, grid, paths, cfg.mc.seed);
    PathSet alpha = alpha_closed_form(cfg.signal, mu);
    std::unique_ptr<CondExpProvider> ce;
    const RegressionCondExp* reg = nullptr;
    if (stochastic) {
        auto r = std::make_unique<RegressionCondExp>(build_features(cfg.signal, alpha), cfg.mc.ridge_penalty);
        reg = r.get();
        ce = std::move(r);
    } else {
        ce = std::make_unique<DeterministicCondExp>();
    }
    SchemeResult result = iterate_scheme(cfg.scheme, alpha, *ce, ops);
    return {std::move(alpha), std::move(result), std::move(ce), reg};
}

json base_summary(const ExperimentConfig& cfg) {
    json s;
    s["config"] = config_to_json(cfg);
    s["seed"] = cfg.mc.seed;
    return s;
}

RunResult run_round_trip(const ExperimentConfig& cfg, const fs::path& dir, bool log_only) {
    const TimeGrid grid(cfg.grid.horizon, cfg.grid.steps);
    const SchemeOperators ops = build_scheme_operators(cfg.scheme, grid);
    SolvedRun run = solve_scheme_run(cfg, ops);
    const SchemeResult& res = run.result;

    json summary = base_summary(cfg);
    summary["converged"] = res.converged;
    summary["final"] = history_tail(res.history);
    summary["picard_total"] = res.picard_total;
    summary["peak_abs_u"] = peak_abs_mean(res.u);
    if (run.regression != nullptr)
        summary["max_normal_eq_residual"] = run.regression->max_normal_eq_residual();

    write_convergence_log(dir / "convergence.log", res.history);
    if (!log_only) {
        const PathSet impact = price_impact_paths(res.u, res.r, cfg.scheme, ops);
        auto [x, cost] = inventory_and_costs(res.u, impact, cfg.scheme.x0);
        summary["pnl"] = eval_pnl(res.u, res.r, run.alpha, cfg.scheme, ops);
        double min_cost = 0.0;
        for (int m = 0; m < cost.paths(); ++m)
            for (int i = 0; i < cost.nodes(); ++i) min_cost = std::min(min_cost, cost.at(m, i));
        summary["min_running_cost"] = min_cost;
        write_trajectories(dir / "trajectories.csv", grid,
                           {{"alpha", &run.alpha},
                            {"u", &res.u},
                            {"r", &res.r},
                            {"X", &x},
                            {"impact", &impact},
                            {"cost", &cost}});
    } else {
        const ConvergenceReport rep = check_convergence_conditions(cfg.scheme, grid.horizon());
        summary["conditions"] = {{"c_g", rep.c_g},
                                 {"c_gh", rep.c_gh},
                                 {"lipschitz", rep.lip},
                                 {"resistance_gain", rep.resistance_gain},
                                 {"kernel_condition", rep.kernel_condition},
                                 {"c_tilde", rep.c_tilde},
                                 {"slippage_condition", rep.slippage_condition},
                                 {"rate", rep.rate}};
    }
    write_summary(dir / "summary.json", summary);
    return {res.converged ? 0 : 1, summary};
}

RunResult run_mi_profile(const ExperimentConfig& cfg, const fs::path& dir) {
    const TimeGrid grid(cfg.profile.window, cfg.profile.steps);
    std::vector<double> u(static_cast<std::size_t>(cfg.profile.steps) + 1, 0.0);
    for (int i = 0; i <= cfg.profile.steps; ++i)
        u[static_cast<std::size_t>(i)] = grid.node(i) < cfg.profile.t_end ? cfg.profile.rate : 0.0;
    const ImpactProfile prof = market_impact(u, cfg.scheme.kernel, cfg.scheme.resistance, grid);
    const ImpactDecomposition dec =
        decompose_pmi_tmi(u, cfg.scheme.kernel, cfg.scheme.resistance, grid, 3.0 * cfg.profile.window);

    std::ofstream out(dir / "mi_profile.csv");
    out << "t,u,r,mi,tmi\n";
    for (std::size_t i = 0; i < prof.times.size(); ++i)
        out << fmt_num(prof.times[i]) << "," << fmt_num(u[i]) << "," << fmt_num(prof.resistance[i])
            << "," << fmt_num(prof.mi[i]) << "," << fmt_num(dec.tmi[i]) << "\n";
    out.close();

    double peak = 0.0;
    for (double v : prof.mi) peak = std::max(peak, v);
    json summary = base_summary(cfg);
    summary["peak_mi"] = peak;
    summary["pmi"] = dec.pmi;
    summary["tail_exponent"] = dec.tail_exponent;
    summary["tail_estimate"] = std::isfinite(dec.tail_estimate) ? json(dec.tail_estimate) : json("inf");
    write_summary(dir / "summary.json", summary);
    return {0, summary};
}

RunResult run_gamma_scaling(const ExperimentConfig& cfg, const fs::path& dir) {
    std::vector<double> gammas(static_cast<std::size_t>(cfg.gammas.count));
    const double lmin = std::log(cfg.gammas.min);
    const double lmax = std::log(cfg.gammas.max);
    for (int i = 0; i < cfg.gammas.count; ++i)
        gammas[static_cast<std::size_t>(i)] =
            std::exp(lmin + (lmax - lmin) * i / std::max(cfg.gammas.count - 1, 1));
    const double t_end = cfg.profile.t_end;
    const double rate = 1.0 / t_end;  // unit volume regardless of duration
    const auto profile = [t_end, rate](double t) { return t < t_end ? rate : 0.0; };
    const ScalingFit fit = gamma_scaling_fit(profile, t_end, gammas, cfg.scheme.kernel,
                                             cfg.scheme.resistance, cfg.profile.steps);

    std::ofstream out(dir / "scaling.csv");
    out << "gamma,peak_mi,grid_steps\n";
    for (std::size_t i = 0; i < fit.gammas.size(); ++i)
        out << fmt_num(fit.gammas[i]) << "," << fmt_num(fit.peak_mi[i]) << "," << fit.grid_steps[i] << "\n";
    out.close();

    json summary = base_summary(cfg);
    summary["exponent"] = fit.exponent;
    summary["prefactor"] = fit.prefactor;
    summary["fit_residual"] = fit.residual;
    summary["top_decade_exponent"] = fit.top_decade_exponent;
    write_summary(dir / "summary.json", summary);
    return {0, summary};
}

RunResult run_linear_check(const ExperimentConfig& cfg, const fs::path& dir) {
    ExperimentConfig lin = cfg;
    lin.signal.sigma = 0.0;
    lin.scheme.resistance.variant = ResistanceFn::Variant::linear;
    const TimeGrid grid(lin.grid.horizon, lin.grid.steps);
    const SchemeOperators ops = build_scheme_operators(lin.scheme, grid);
    SolvedRun run = solve_scheme_run(lin, ops);
    const PathSet direct = solve_linear_direct(lin.scheme.resistance.slope, lin.scheme, ops, run.alpha);

    PathSet diff(grid, 1);
    for (int i = 0; i <= grid.steps(); ++i) diff.at(0, i) = run.result.u.at(0, i) - direct.at(0, i);
    const double deviation = discrete_norm(diff) / discrete_norm(direct);

    write_convergence_log(dir / "convergence.log", run.result.history);
    write_trajectories(dir / "trajectories.csv", grid,
                       {{"u_iterative", &run.result.u}, {"u_direct", &direct}});
    json summary = base_summary(lin);
    summary["converged"] = run.result.converged;
    summary["final"] = history_tail(run.result.history);
    summary["max_rel_deviation"] = deviation;
    write_summary(dir / "summary.json", summary);
    return {run.result.converged ? 0 : 1, summary};
}

RunResult run_sensitivity_sweep(const ExperimentConfig& cfg, const fs::path& dir) {
    const std::vector<double> nus{0.5, 0.614, 0.7, 0.8, 0.9};
    const std::vector<double> kinfs{0.5, 1.0, 1.5};
    json settings = json::array();
    bool all_converged = true;
    auto run_one = [&](const std::string& tag, double nu, double kinf) {
        ExperimentConfig c = cfg;
        c.signal.sigma = 0.0;
        c.scheme.kernel.nu = nu;
        c.scheme.kernel.kappa_inf = kinf;
        const TimeGrid grid(c.grid.horizon, c.grid.steps);
        const SchemeOperators ops = build_scheme_operators(c.scheme, grid);
        SolvedRun run = solve_scheme_run(c, ops);
        write_trajectories(dir / ("trajectories_" + tag + ".csv"), grid,
                           {{"alpha", &run.alpha}, {"u", &run.result.u}, {"r", &run.result.r}});
        all_converged = all_converged && run.result.converged;
        settings.push_back({{"tag", tag},
                            {"nu", nu},
                            {"kappa_inf", kinf},
                            {"converged", run.result.converged},
                            {"peak_abs_u", peak_abs_mean(run.result.u)},
                            {"final", history_tail(run.result.history)}});
    };
    for (double nu : nus) run_one("nu_" + fmt_tag(nu), nu, cfg.scheme.kernel.kappa_inf);
    for (double kinf : kinfs) run_one("kinf_" + fmt_tag(kinf), cfg.scheme.kernel.nu, kinf);

    json summary = base_summary(cfg);
    summary["settings"] = settings;
    summary["converged"] = all_converged;
    write_summary(dir / "summary.json", summary);
    return {all_converged ? 0 : 1, summary};
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    if (cfg.experiment == "round_trip") return run_round_trip(cfg, dir, false);
    if (cfg.experiment == "convergence_report") return run_round_trip(cfg, dir, true);
    if (cfg.experiment == "mi_profile") return run_mi_profile(cfg, dir);
    if (cfg.experiment == "gamma_scaling") return run_gamma_scaling(cfg, dir);
    if (cfg.experiment == "linear_check") return run_linear_check(cfg, dir);
    if (cfg.experiment == "sensitivity_sweep") return run_sensitivity_sweep(cfg, dir);
    throw ConfigError("run_experiment: unknown experiment kind '" + cfg.experiment + "'");
}

}  // namespace qmr
