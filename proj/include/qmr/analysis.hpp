#pragma once

#include <functional>
#include <vector>

#include "qmr/foc.hpp"
#include "qmr/resistance.hpp"

namespace qmr {

/// Market impact trajectory MI(t) = int_0^t K(t-s)(u_s - r_s) ds of a
/// deterministic trading profile, with the endogenous resistance r solved
/// along the way.
struct ImpactProfile {
    std::vector<double> times;
    std::vector<double> mi;
    std::vector<double> resistance;
};

ImpactProfile market_impact(const std::vector<double>& u, const KernelSpec& kernel,
                            const ResistanceFn& fn, const TimeGrid& grid);

/// Split of the impact into its permanent level and transient remainder,
/// with the infinite time integrals truncated at a finite horizon and an
/// empirical power-law estimate of the neglected resistance tail.
struct ImpactDecomposition {
    std::vector<double> times;
    std::vector<double> tmi;
    double pmi = 0.0;
    double tail_exponent = 0.0;  // fitted decay power of |r| past the support
    double tail_estimate = 0.0;  // bound on the PMI truncation error; inf if not integrable
};

/// u lives on grid (its support); horizon >= grid.horizon() is the truncation
/// point, extended on the same step size.
ImpactDecomposition decompose_pmi_tmi(const std::vector<double>& u, const KernelSpec& kernel,
                                      const ResistanceFn& fn, const TimeGrid& grid, double horizon);

/// Peak-impact scaling in order size: peak MI of gamma * u for each gamma,
/// with a least squares power-law fit on log-log values. The grid is refined
/// (step count doubled) per gamma until the peak stabilizes.
struct ScalingFit {
    double prefactor = 0.0;
    double exponent = 0.0;
    double residual = 0.0;            // rms log-space fit residual
    double top_decade_exponent = 0.0;  // fit restricted to gamma >= max/10
    std::vector<double> gammas;
    std::vector<double> peak_mi;
    std::vector<int> grid_steps;
};

ScalingFit gamma_scaling_fit(const std::function<double(double)>& base_profile, double window,
                             const std::vector<double>& gammas, const KernelSpec& kernel,
                             const ResistanceFn& fn, int base_steps = 400, double refine_rtol = 5e-4,
                             int max_steps = 204800);

/// Objective value J(u) = <u,alpha> - (gamma/2)||u||^2 - <u, L_full (u-r)>
///  - (phi/2)||X||^2 - (varrho/2) E[X_T^2], path-averaged.
double eval_pnl(const PathSet& u, const PathSet& r, const PathSet& alpha, const SchemeConfig& cfg,
                const SchemeOperators& ops);

enum class AdjointMode {
    quadrature,  // Nystrom adjoint matrices; mirrors the FOC residual
    transpose,   // exact transposes; the gradient of the discrete objective
};

/// Gradient of J at u. Resistance and the auxiliary backward process are
/// solved internally.
PathSet eval_gradient(const PathSet& u, const PathSet& alpha, const SchemeConfig& cfg,
                      const SchemeOperators& ops, const CondExpProvider& ce, AdjointMode mode);

/// Price displacement I(m,i) = (gamma/2) u + (L_full (u - r))_i along paths.
PathSet price_impact_paths(const PathSet& u, const PathSet& r, const SchemeConfig& cfg,
                           const SchemeOperators& ops);

/// X(m,i) = x0 + delta * sum_{j<i} u(m,j);
/// running_cost(m,i) = delta * sum_{j<i} impact(m,j) * u(m,j).
std::pair<PathSet, PathSet> inventory_and_costs(const PathSet& u, const PathSet& impact, double x0);

}  // namespace qmr
