#include "qmr/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qmr/simd/kernels.hpp"

namespace qmr {
namespace {

/// Reversed Toeplitz cell weights of a convolution kernel on a uniform grid:
/// lrev[n - d] = int_{(d-1)dt}^{d dt} K, so row i of the forward operator is
/// the contiguous slice lrev[n-i .. n-1].
std::vector<double> reversed_weights(const KernelSpec& spec, const TimeGrid& grid) {
    const int n = grid.steps();
    std::vector<double> lrev(static_cast<std::size_t>(n) + 1, 0.0);
    for (int d = 1; d <= n; ++d)
        lrev[static_cast<std::size_t>(n - d)] = spec.primitive(grid.node(d)) - spec.primitive(grid.node(d - 1));
    return lrev;
}

/// In-order forward substitution for the causal resistance fixed point,
/// exact in one sweep. r has n+1 entries.
void causal_resistance(const std::vector<double>& u, std::vector<double>& r,
                       const std::vector<double>& lrev_trans, const ResistanceFn& fn, int n) {
    for (int i = 0; i <= n; ++i) {
        const double z = simd::dot_diff(lrev_trans.data() + (n - i), u.data(), r.data(),
                                        static_cast<std::size_t>(i));
        r[static_cast<std::size_t>(i)] = fn.value(z);
    }
}

struct LogFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms = 0.0;
};

LogFit fit_log_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    LogFit f;
    const double denom = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double res = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
        acc += res * res;
    }
    f.rms = std::sqrt(acc / n);
    return f;
}

}  // namespace

ImpactProfile market_impact(const std::vector<double>& u, const KernelSpec& kernel,
                            const ResistanceFn& fn, const TimeGrid& grid) {
    kernel.validate();
    fn.validate();
    const int n = grid.steps();
    if (u.size() != static_cast<std::size_t>(n) + 1)
        throw std::invalid_argument("market_impact: profile length must match grid nodes");
    const std::vector<double> lrev_trans = reversed_weights(kernel.transient_only(), grid);
    const std::vector<double> lrev_full = reversed_weights(kernel, grid);
    ImpactProfile p;
    p.times = grid.nodes();
    p.resistance.assign(static_cast<std::size_t>(n) + 1, 0.0);
    causal_resistance(u, p.resistance, lrev_trans, fn, n);
    p.mi.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
        p.mi[static_cast<std::size_t>(i)] = simd::dot_diff(lrev_full.data() + (n - i), u.data(),
                                                           p.resistance.data(), static_cast<std::size_t>(i));
    return p;
}

ImpactDecomposition decompose_pmi_tmi(const std::vector<double>& u, const KernelSpec& kernel,
                                      const ResistanceFn& fn, const TimeGrid& grid, double horizon) {
    kernel.validate();
    fn.validate();
    if (u.size() != static_cast<std::size_t>(grid.steps()) + 1)
        throw std::invalid_argument("decompose_pmi_tmi: profile length must match grid nodes");
    if (horizon < grid.horizon())
        throw std::invalid_argument("decompose_pmi_tmi: horizon shorter than the profile support");
    const double dt = grid.delta();
    const int n_ext = static_cast<int>(std::ceil(horizon / dt - 1e-12));
    const TimeGrid ext(n_ext * dt, n_ext);
    std::vector<double> ue(static_cast<std::size_t>(n_ext) + 1, 0.0);
    for (std::size_t i = 0; i < u.size() && i < ue.size(); ++i) ue[i] = u[i];

    const std::vector<double> lrev_trans = reversed_weights(kernel.transient_only(), ext);
    std::vector<double> r(static_cast<std::size_t>(n_ext) + 1, 0.0);
    causal_resistance(ue, r, lrev_trans, fn, n_ext);

    ImpactDecomposition d;
    d.times = ext.nodes();
    // net flow and its running integral
    std::vector<double> cum(static_cast<std::size_t>(n_ext) + 1, 0.0);
    for (int i = 0; i < n_ext; ++i)
        cum[static_cast<std::size_t>(i) + 1] =
            cum[static_cast<std::size_t>(i)] + (ue[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)]) * dt;
    d.pmi = kernel.kappa_inf * cum[static_cast<std::size_t>(n_ext)];
    d.tmi.resize(static_cast<std::size_t>(n_ext) + 1);
    for (int i = 0; i <= n_ext; ++i) {
        const double trans = simd::dot_diff(lrev_trans.data() + (n_ext - i), ue.data(), r.data(),
                                            static_cast<std::size_t>(i));
        const double tail = cum[static_cast<std::size_t>(n_ext)] - cum[static_cast<std::size_t>(i)];
        d.tmi[static_cast<std::size_t>(i)] = trans - kernel.kappa_inf * tail;
    }

    // Empirical decay of the resistance past the support, fitted on the last
    // half (log-time) of the extension.
    d.tail_exponent = 0.0;
    d.tail_estimate = 0.0;
    std::vector<double> ts, rs;
    for (int i = 0; i <= n_ext; ++i) {
        const double t = ext.node(i);
        if (t >= 0.5 * horizon && std::abs(r[static_cast<std::size_t>(i)]) > 1e-300) {
            ts.push_back(t);
            rs.push_back(std::abs(r[static_cast<std::size_t>(i)]));
        }
    }
    if (ts.size() >= 3) {
        const LogFit f = fit_log_line(ts, rs);
        d.tail_exponent = f.slope;
        const double r_end = rs.back();
        d.tail_estimate = f.slope < -1.0
                              ? kernel.kappa_inf * r_end * horizon / (-f.slope - 1.0)
                              : std::numeric_limits<double>::infinity();
    }
    return d;
}

ScalingFit gamma_scaling_fit(const std::function<double(double)>& base_profile, double window,
                             const std::vector<double>& gammas, const KernelSpec& kernel,
                             const ResistanceFn& fn, int base_steps, double refine_rtol,
                             int max_steps) {
    kernel.validate();
    fn.validate();
    if (gammas.size() < 3) throw std::invalid_argument("gamma_scaling_fit: need at least 3 gamma values");
    for (double g : gammas)
        if (!(g > 0.0)) throw std::invalid_argument("gamma_scaling_fit: gamma values must be positive");

    ScalingFit fit;
    fit.gammas = gammas;
    for (double gamma : gammas) {
        double peak = 0.0;
        double prev = -1.0;
        int steps = base_steps;
        while (true) {
            const TimeGrid grid(window, steps);
            std::vector<double> u(static_cast<std::size_t>(steps) + 1);
            for (int i = 0; i <= steps; ++i) u[static_cast<std::size_t>(i)] = gamma * base_profile(grid.node(i));
            const std::vector<double> lrev_trans = reversed_weights(kernel.transient_only(), grid);
            const std::vector<double> lrev_full = reversed_weights(kernel, grid);
            std::vector<double> r(static_cast<std::size_t>(steps) + 1, 0.0);
            causal_resistance(u, r, lrev_trans, fn, steps);
            peak = 0.0;
            for (int i = 0; i <= steps; ++i) {
                const double mi = simd::dot_diff(lrev_full.data() + (steps - i), u.data(), r.data(),
                                                 static_cast<std::size_t>(i));
                peak = std::max(peak, mi);
            }
            if (prev > 0.0 && std::abs(peak - prev) <= refine_rtol * std::abs(peak)) break;
            if (steps >= max_steps) break;
            prev = peak;
            steps *= 2;
        }
        if (!(peak > 0.0)) throw std::runtime_error("gamma_scaling_fit: non-positive peak impact");
        fit.peak_mi.push_back(peak);
        fit.grid_steps.push_back(steps);
    }

    const LogFit main_fit = fit_log_line(fit.gammas, fit.peak_mi);
    fit.exponent = main_fit.slope;
    fit.prefactor = std::exp(main_fit.intercept);
    fit.residual = main_fit.rms;

    double gmax = 0.0;
    for (double g : fit.gammas) gmax = std::max(gmax, g);
    std::vector<double> tg, tm;
    for (std::size_t i = 0; i < fit.gammas.size(); ++i) {
        if (fit.gammas[i] >= gmax / 10.0) {
            tg.push_back(fit.gammas[i]);
            tm.push_back(fit.peak_mi[i]);
        }
    }
    fit.top_decade_exponent = tg.size() >= 2 ? fit_log_line(tg, tm).slope : fit.exponent;
    return fit;
}

double eval_pnl(const PathSet& u, const PathSet& r, const PathSet& alpha, const SchemeConfig& cfg,
                const SchemeOperators& ops) {
    const int n = ops.full.n;
    const int paths = u.paths();
    const double dt = u.grid().delta();

    PathSet conv(u.grid(), paths);
    for (int m = 0; m < paths; ++m) {
        const double* ur = u.row(m);
        const double* rr = r.row(m);
        double* cr = conv.row(m);
        for (int i = 0; i < n; ++i)
            cr[i] = simd::dot_diff(ops.full.fwd_row(i), ur, rr, static_cast<std::size_t>(i));
        cr[n] = 0.0;
    }

    double j = inner_product(u, alpha);
    j -= 0.5 * cfg.gamma * inner_product(u, u);
    j -= inner_product(u, conv);

    double pen = 0.0;
    for (int m = 0; m < paths; ++m) {
        const double* ur = u.row(m);
        double x = cfg.x0;
        double accx = 0.0;
        for (int i = 0; i < n; ++i) {
            accx += x * x;
            x += ur[i] * dt;
        }
        pen += 0.5 * cfg.penalty.phi * accx * dt + 0.5 * cfg.penalty.varrho * x * x;
    }
    return j - pen / paths;
}

PathSet eval_gradient(const PathSet& u, const PathSet& alpha, const SchemeConfig& cfg,
                      const SchemeOperators& ops, const CondExpProvider& ce, AdjointMode mode) {
    const int n = ops.full.n;
    const int paths = u.paths();
    const TimeGrid& grid = u.grid();

    PathSet r(grid, paths);
    solve_resistance(u, r, ops.transient, cfg.resistance, cfg.eps2, cfg.max_picard);

    PathSet f(grid, paths);
    if (mode == AdjointMode::quadrature) {
        f = solve_backward_f(u, r, ops.transient, ops.full, cfg.resistance, ce);
    } else {
        const NystromMatrices gt = transpose_matrices(ops.transient);
        const NystromMatrices ght = transpose_matrices(ops.full);
        f = solve_backward_f(u, r, gt, ght, cfg.resistance, ce);
    }

    PathSet g(grid, paths);
    if (mode == AdjointMode::quadrature) {
        PathSet adj_pen(grid, paths);
        apply_adjoint(ops.pen, u, ce, adj_pen);
        for (int m = 0; m < paths; ++m) {
            const double* ur = u.row(m);
            const double* rr = r.row(m);
            double* gr = g.row(m);
            for (int i = 0; i < n; ++i) {
                double v = alpha.at(m, i) -
                           cfg.x0 * (cfg.penalty.phi * (grid.horizon() - grid.node(i)) + cfg.penalty.varrho);
                v -= cfg.gamma * ur[i];
                v -= simd::dot_diff(ops.full.fwd_row(i), ur, rr, static_cast<std::size_t>(i));
                v -= f.at(m, i);
                v -= simd::dot(ops.pen.fwd_row(i), ur, static_cast<std::size_t>(i));
                v -= adj_pen.at(m, i);
                gr[i] = v;
            }
            gr[n] = 0.0;
        }
    } else {
        // Exact gradient of the discrete objective: the penalty contribution
        // is phi*dt*sum_{i>k} X_i + varrho*X_N per rate node k.
        const double dt = grid.delta();
        for (int m = 0; m < paths; ++m) {
            const double* ur = u.row(m);
            const double* rr = r.row(m);
            double* gr = g.row(m);
            std::vector<double> x(static_cast<std::size_t>(n) + 1);
            x[0] = cfg.x0;
            for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i) + 1] = x[static_cast<std::size_t>(i)] + ur[i] * dt;
            // suffix sums of X over nodes k+1..n-1
            std::vector<double> sfx(static_cast<std::size_t>(n) + 1, 0.0);
            for (int i = n - 1; i >= 1; --i) sfx[static_cast<std::size_t>(i)] = sfx[static_cast<std::size_t>(i) + 1] + x[static_cast<std::size_t>(i)];
            for (int i = 0; i < n; ++i) {
                double v = alpha.at(m, i);
                v -= cfg.gamma * ur[i];
                v -= simd::dot_diff(ops.full.fwd_row(i), ur, rr, static_cast<std::size_t>(i));
                v -= f.at(m, i);
                v -= cfg.penalty.phi * dt * sfx[static_cast<std::size_t>(i) + 1] +
                     cfg.penalty.varrho * x[static_cast<std::size_t>(n)];
                gr[i] = v;
            }
            gr[n] = 0.0;
        }
    }
    return g;
}

PathSet price_impact_paths(const PathSet& u, const PathSet& r, const SchemeConfig& cfg,
                           const SchemeOperators& ops) {
    const int n = ops.full.n;
    PathSet impact(u.grid(), u.paths());
    for (int m = 0; m < u.paths(); ++m) {
        const double* ur = u.row(m);
        const double* rr = r.row(m);
        double* ir = impact.row(m);
        for (int i = 0; i < n; ++i)
            ir[i] = 0.5 * cfg.gamma * ur[i] +
                    simd::dot_diff(ops.full.fwd_row(i), ur, rr, static_cast<std::size_t>(i));
        ir[n] = ir[n - 1];
    }
    return impact;
}

std::pair<PathSet, PathSet> inventory_and_costs(const PathSet& u, const PathSet& impact, double x0) {
    if (u.paths() != impact.paths() || u.nodes() != impact.nodes())
        throw std::invalid_argument("inventory_and_costs: shape mismatch");
    const int n = u.grid().steps();
    const double dt = u.grid().delta();
    PathSet x(u.grid(), u.paths());
    PathSet cost(u.grid(), u.paths());
    for (int m = 0; m < u.paths(); ++m) {
        const double* ur = u.row(m);
        const double* ir = impact.row(m);
        double* xr = x.row(m);
        double* cr = cost.row(m);
        xr[0] = x0;
        cr[0] = 0.0;
        for (int i = 0; i < n; ++i) {
            xr[i + 1] = xr[i] + ur[i] * dt;
            cr[i + 1] = cr[i] + ir[i] * ur[i] * dt;
        }
    }
    return {std::move(x), std::move(cost)};
}

}  // namespace qmr
