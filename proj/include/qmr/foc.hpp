#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qmr/lsmc.hpp"
#include "qmr/nystrom.hpp"
#include "qmr/path_set.hpp"
#include "qmr/resistance.hpp"
#include "qmr/volterra.hpp"

namespace qmr {

/// Problem data for the first order condition of the execution problem:
/// instantaneous cost gamma, decaying impact kernel (permanent level plus
/// transient tail), inventory penalties, and the market response map.
struct SchemeConfig {
    KernelSpec kernel;
    double gamma = 0.2;
    PenaltyKernelParams penalty;
    ResistanceFn resistance;
    double x0 = 0.0;

    double eps1 = 1e-11;   // outer stop: FOC residual
    double eps2 = 1e-16;   // resistance fixed point defect
    int max_outer = 100;
    int max_picard = 500;

    void validate() const {
        kernel.validate();
        penalty.validate();
        resistance.validate();
        if (!(gamma > 0.0)) throw std::invalid_argument("SchemeConfig: gamma must be positive");
        if (max_outer < 1) throw std::invalid_argument("SchemeConfig: max_outer must be positive");
    }
};

/// Discretized operators shared by all solver stages, built once per grid.
struct SchemeOperators {
    TimeGrid grid;
    NystromMatrices transient;  // kernel without the permanent level
    NystromMatrices full;       // full kernel
    NystromMatrices pen;        // inventory penalty kernel
    Eigen::MatrixXd kmat;       // gamma I + L_full + L_pen + M_pen
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    Eigen::MatrixXd klow;       // causal part only: gamma I + L_full + L_pen + diag(M_pen)
};

SchemeOperators build_scheme_operators(const SchemeConfig& cfg, const TimeGrid& grid);

/// Replace the adjoint triangle with the exact transpose of the forward one
/// (the forward triangle is kept). Yields the algebraic adjoint pair needed
/// for exact discrete gradients.
NystromMatrices transpose_matrices(const NystromMatrices& m);

/// Solve the backward recursion for the auxiliary process
///   f_p (1 + M_g(p,p) w_p) = M_gh(p,p) u_p + sum_{k>p} M_gh(p,k) E_p[u_k]
///                            - sum_{k>p} M_g(p,k) E_p[w_k f_k],
/// where w = U'(L_g(u - r)), terminal value 0. g is the transient kernel,
/// gh the full one.
PathSet solve_backward_f(const PathSet& u, const PathSet& r, const NystromMatrices& g,
                         const NystromMatrices& gh, const ResistanceFn& fn,
                         const CondExpProvider& ce);

/// Residual of the backward recursion for a given f, computed with the exact
/// same summation order as solve_backward_f so a solver output measures at
/// rounding level. Returns max over paths of delta * sum_p residual^2.
double backward_error_ebf(const PathSet& f, const PathSet& u, const PathSet& r,
                          const NystromMatrices& g, const NystromMatrices& gh,
                          const ResistanceFn& fn, const CondExpProvider& ce);

/// Nonlinearity forcing term A(u,r,f) = L_full r - f.
PathSet assemble_A(const PathSet& u, const PathSet& r, const PathSet& f, const SchemeOperators& ops);

/// Exact solver for the linear FOC step
///   gamma u + (L_full + L_pen) u + M_pen(i,i) u_i
///   + sum_{j>i} M_pen(i,j) E_{t_i} u_j = rhs.
/// With a deterministic oracle this is one dense solve. With the regression
/// oracle the conditional expectations are rank-basis_size projections per
/// node, so the anticipating coupling is eliminated into a small dense system
/// over the stacked regression coefficients; that system depends only on the
/// operators and basis, and is factored once at construction.
class LinearFocSolver {
public:
    LinearFocSolver(const SchemeOperators& ops, const CondExpProvider& ce);
    void solve(const PathSet& rhs, PathSet& u) const;

private:
    const SchemeOperators& ops_;
    const CondExpProvider& ce_;
    const RegressionCondExp* reg_ = nullptr;
    Eigen::PartialPivLU<Eigen::MatrixXd> coeff_lu_;  // I + T over stacked coefficients
};

/// One-shot convenience wrapper around LinearFocSolver.
void solve_linear_foc_step(const PathSet& rhs, PathSet& u, const SchemeConfig& cfg,
                           const SchemeOperators& ops, const CondExpProvider& ce);

/// FOC residual: max over paths of delta * sum_i |gamma u_i + (L_full + L_pen) u
///  + (M_pen u)_i - L_full r + f_i - alpha_i + x0 (phi (T-t_i) + varrho)|^2.
double foc_error_e1(const PathSet& u, const PathSet& r, const PathSet& f, const PathSet& alpha,
                    const SchemeConfig& cfg, const SchemeOperators& ops, const CondExpProvider& ce);

struct IterationRecord {
    int iter = 0;
    double e1 = 0.0;
    double e2 = 0.0;
    double ebf = 0.0;
    double seconds = 0.0;  // cumulative wall time when recorded
};

struct SchemeResult {
    PathSet u, r, f;
    bool converged = false;
    std::vector<IterationRecord> history;
    int picard_total = 0;
};

/// Outer fixed point iteration u^{[n]} from u^{[0]} = r^{[0]} = 0. Runs until
/// the FOC residual reaches cfg.eps1 or cfg.max_outer iterations; a run that
/// hits the cap returns with converged = false rather than throwing.
SchemeResult iterate_scheme(const SchemeConfig& cfg, const PathSet& alpha, const CondExpProvider& ce,
                            const SchemeOperators& ops);

/// Direct dense solve of the deterministic FOC with a linear response map of
/// slope a, via Schur-style elimination of r and f. Oracle for the iterative
/// scheme in the linear special case.
PathSet solve_linear_direct(double slope, const SchemeConfig& cfg, const SchemeOperators& ops,
                            const PathSet& alpha);

struct ConvergenceReport {
    double c_g = 0.0;            // L2 constant of the transient kernel
    double c_gh = 0.0;           // L2 constant of the full kernel
    double lip = 0.0;            // Lipschitz / derivative bound of U
    double resistance_gain = 0.0;  // lip * sqrt(T * c_g)
    bool kernel_condition = false;
    double c_tilde = 0.0;
    bool slippage_condition = false;
    double rate = 0.0;           // contraction factor c_tilde / gamma
};

ConvergenceReport check_convergence_conditions(const SchemeConfig& cfg, double horizon);

}  // namespace qmr
