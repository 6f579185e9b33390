#include "qmr/foc.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "qmr/simd/kernels.hpp"

namespace qmr {
namespace {

Eigen::MatrixXd dense_forward(const NystromMatrices& m) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.n, m.n);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < i; ++j) d(i, j) = m.fwd(i, j);
    return d;
}

Eigen::MatrixXd dense_adjoint(const NystromMatrices& m) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.n, m.n);
    for (int i = 0; i < m.n; ++i)
        for (int j = i; j < m.n; ++j) d(i, j) = m.adj(i, j);
    return d;
}

PathSet derivative_weights(const PathSet& u, const PathSet& r, const NystromMatrices& g,
                           const ResistanceFn& fn) {
    const int n = g.n;
    PathSet w(u.grid(), u.paths());
    for (int m = 0; m < u.paths(); ++m) {
        const double* ur = u.row(m);
        const double* rr = r.row(m);
        double* wr = w.row(m);
        for (int i = 0; i < n; ++i)
            wr[i] = fn.derivative(simd::dot_diff(g.fwd_row(i), ur, rr, static_cast<std::size_t>(i)));
        wr[n] = 0.0;
    }
    return w;
}

/// Shared core of the backward recursion. In solve mode (f_in == nullptr) it
/// writes f; in residual mode it replays the identical right hand side
/// accumulation against f_in and returns the worst path residual.
double backward_core(const PathSet& u, const PathSet& r, const NystromMatrices& g,
                     const NystromMatrices& gh, const ResistanceFn& fn, const CondExpProvider& ce,
                     PathSet& f, const PathSet* f_in) {
    const int n = g.n;
    const int paths = u.paths();
    const double dt = u.grid().delta();
    const PathSet w = derivative_weights(u, r, g, fn);
    double worst = 0.0;

    if (ce.is_deterministic()) {
        std::vector<double> wf(static_cast<std::size_t>(n), 0.0);
        for (int m = 0; m < paths; ++m) {
            const double* ur = u.row(m);
            const double* wr = w.row(m);
            double* fr = f.row(m);
            double acc = 0.0;
            fr[n] = 0.0;
            for (int p = n - 1; p >= 0; --p) {
                const std::size_t tail = static_cast<std::size_t>(n - 1 - p);
                double s = gh.adj(p, p) * ur[p];
                s += simd::dot(gh.adj_row(p) + p + 1, ur + p + 1, tail);
                s -= simd::dot(g.adj_row(p) + p + 1, wf.data() + p + 1, tail);
                const double pivot = 1.0 + g.adj(p, p) * wr[p];
                if (pivot <= 0.0)
                    throw std::runtime_error("solve_backward_f: non-positive pivot in recursion");
                double fp;
                if (f_in == nullptr) {
                    fp = s / pivot;
                    fr[p] = fp;
                } else {
                    fp = f_in->at(m, p);
                    const double res = fp * pivot - s;
                    acc += res * res;
                }
                wf[static_cast<std::size_t>(p)] = wr[p] * fp;
            }
            worst = std::max(worst, acc * dt);
        }
        return worst;
    }

    // Column-major staging across paths for the regression oracle.
    std::vector<double> ucols(static_cast<std::size_t>(n) * paths);
    std::vector<double> wfcols(static_cast<std::size_t>(n) * paths, 0.0);
    for (int k = 0; k < n; ++k)
        u.gather_node(k, std::span<double>(ucols.data() + static_cast<std::size_t>(k) * paths, paths));
    std::vector<double> eu, ewf;
    std::vector<double> acc(static_cast<std::size_t>(paths), 0.0);
    for (int m = 0; m < paths; ++m) f.at(m, n) = 0.0;
    for (int p = n - 1; p >= 0; --p) {
        const int k_rows = n - 1 - p;
        eu.assign(static_cast<std::size_t>(std::max(k_rows, 1)) * paths, 0.0);
        ewf.assign(static_cast<std::size_t>(std::max(k_rows, 1)) * paths, 0.0);
        if (k_rows > 0) {
            ce.estimate_block(p, ucols.data() + static_cast<std::size_t>(p + 1) * paths, k_rows, paths,
                              eu.data());
            ce.estimate_block(p, wfcols.data() + static_cast<std::size_t>(p + 1) * paths, k_rows, paths,
                              ewf.data());
        }
        const double* ghr = gh.adj_row(p);
        const double* gr = g.adj_row(p);
        for (int m = 0; m < paths; ++m) {
            double s = ghr[p] * u.at(m, p);
            for (int k = 0; k < k_rows; ++k) s += ghr[p + 1 + k] * eu[static_cast<std::size_t>(k) * paths + m];
            for (int k = 0; k < k_rows; ++k) s -= gr[p + 1 + k] * ewf[static_cast<std::size_t>(k) * paths + m];
            const double pivot = 1.0 + gr[p] * w.at(m, p);
            if (pivot <= 0.0)
                throw std::runtime_error("solve_backward_f: non-positive pivot in recursion");
            double fp;
            if (f_in == nullptr) {
                fp = s / pivot;
                f.at(m, p) = fp;
            } else {
                fp = f_in->at(m, p);
                const double res = fp * pivot - s;
                acc[static_cast<std::size_t>(m)] += res * res;
            }
            wfcols[static_cast<std::size_t>(p) * paths + m] = w.at(m, p) * fp;
        }
    }
    for (int m = 0; m < paths; ++m) worst = std::max(worst, acc[static_cast<std::size_t>(m)] * dt);
    return worst;
}

}  // namespace

SchemeOperators build_scheme_operators(const SchemeConfig& cfg, const TimeGrid& grid) {
    cfg.validate();
    SchemeOperators ops{grid,
                        build_nystrom(cfg.kernel.transient_only(), grid),
                        build_nystrom(cfg.kernel, grid),
                        build_penalty_matrices(cfg.penalty, grid),
                        {},
                        {}};
    const int n = grid.steps();
    ops.kmat = cfg.gamma * Eigen::MatrixXd::Identity(n, n) + dense_forward(ops.full) +
               dense_forward(ops.pen) + dense_adjoint(ops.pen);
    ops.lu.compute(ops.kmat);
    ops.klow = cfg.gamma * Eigen::MatrixXd::Identity(n, n) + dense_forward(ops.full) +
               dense_forward(ops.pen);
    for (int i = 0; i < n; ++i) ops.klow(i, i) += ops.pen.adj(i, i);
    return ops;
}

NystromMatrices transpose_matrices(const NystromMatrices& m) {
    NystromMatrices t;
    t.n = m.n;
    t.forward = m.forward;
    t.adjoint.assign(static_cast<std::size_t>(m.n) * m.n, 0.0);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < i; ++j) t.adjoint[static_cast<std::size_t>(j) * m.n + i] = m.fwd(i, j);
    return t;
}

PathSet solve_backward_f(const PathSet& u, const PathSet& r, const NystromMatrices& g,
                         const NystromMatrices& gh, const ResistanceFn& fn,
                         const CondExpProvider& ce) {
    PathSet f(u.grid(), u.paths());
    backward_core(u, r, g, gh, fn, ce, f, nullptr);
    return f;
}

double backward_error_ebf(const PathSet& f, const PathSet& u, const PathSet& r,
                          const NystromMatrices& g, const NystromMatrices& gh,
                          const ResistanceFn& fn, const CondExpProvider& ce) {
    PathSet scratch(u.grid(), u.paths());
    return backward_core(u, r, g, gh, fn, ce, scratch, &f);
}

PathSet assemble_A(const PathSet& u, const PathSet& r, const PathSet& f, const SchemeOperators& ops) {
    (void)u;
    const int n = ops.full.n;
    PathSet a(r.grid(), r.paths());
    for (int m = 0; m < r.paths(); ++m) {
        const double* rr = r.row(m);
        const double* fr = f.row(m);
        double* ar = a.row(m);
        for (int i = 0; i < n; ++i)
            ar[i] = simd::dot(ops.full.fwd_row(i), rr, static_cast<std::size_t>(i)) - fr[i];
        ar[n] = 0.0;
    }
    return a;
}

namespace {

/// In-place forward substitution with the lower-triangular matrix klow for a
/// block of right hand sides (one column per path).
void forward_subst(const Eigen::MatrixXd& klow, Eigen::MatrixXd& b, int first_row = 0) {
    const int n = static_cast<int>(klow.rows());
    for (int i = first_row; i < n; ++i) {
        if (i > first_row)
            b.row(i).noalias() -= klow.row(i).segment(first_row, i - first_row) *
                                  b.middleRows(first_row, i - first_row);
        b.row(i) /= klow(i, i);
    }
}

}  // namespace

LinearFocSolver::LinearFocSolver(const SchemeOperators& ops, const CondExpProvider& ce)
    : ops_(ops), ce_(ce) {
    if (ce.is_deterministic()) return;
    reg_ = dynamic_cast<const RegressionCondExp*>(&ce);
    if (reg_ == nullptr)
        throw std::invalid_argument("LinearFocSolver: the stochastic solve needs the regression oracle");

    // The anticipating part couples paths only through the per-node regression
    // projections P_i = X_i (X_i'X_i + eta I)^{-1} X_i'. Writing the coupling
    // as X_i c_i with c_i in R^nb, the system
    //   K_low u + [X_i c_i]_i = rhs,  c_i = GramInv_i X_i' sum_{j>i} M_pen(i,j) u_j
    // reduces to a dense (n*nb) system in the stacked coefficients c; its
    // matrix is independent of the right hand side, so it is factored here.
    const int n = ops.full.n;
    const int nb = RegressionCondExp::basis_size;
    const int paths = static_cast<int>(reg_->basis(0).rows());
    Eigen::MatrixXd t(n * nb, n * nb);
    Eigen::MatrixXd s(n, paths);
    Eigen::VectorXd tcol(n * nb);
    for (int ip = 0; ip < n; ++ip) {
        for (int bidx = 0; bidx < nb; ++bidx) {
            s.setZero();
            s.row(ip) = reg_->basis(ip).col(bidx).transpose();
            forward_subst(ops.klow, s, ip);
            Eigen::RowVectorXd v(paths);
            for (int i = 0; i < n; ++i) {
                v.setZero();
                const double* prow = ops.pen.adj_row(i);
                for (int j = std::max(i + 1, ip); j < n; ++j) v.noalias() += prow[j] * s.row(j);
                tcol.segment(i * nb, nb) =
                    reg_->gram_solve(i, reg_->basis(i).transpose() * v.transpose());
            }
            t.col(ip * nb + bidx) = tcol;
        }
    }
    t.diagonal().array() += 1.0;
    coeff_lu_.compute(t);
}

void LinearFocSolver::solve(const PathSet& rhs, PathSet& u) const {
    const int n = ops_.full.n;
    const int paths = u.paths();

    if (ce_.is_deterministic()) {
        Eigen::MatrixXd b(n, paths);
        for (int m = 0; m < paths; ++m)
            for (int i = 0; i < n; ++i) b(i, m) = rhs.at(m, i);
        const Eigen::MatrixXd sol = ops_.lu.solve(b);
        for (int m = 0; m < paths; ++m) {
            for (int i = 0; i < n; ++i) u.at(m, i) = sol(i, m);
            u.at(m, n) = 0.0;
        }
        return;
    }

    const int nb = RegressionCondExp::basis_size;
    const auto project = [&](const Eigen::MatrixXd& field, Eigen::VectorXd& out) {
        Eigen::RowVectorXd v(paths);
        for (int i = 0; i < n; ++i) {
            v.setZero();
            const double* prow = ops_.pen.adj_row(i);
            for (int j = i + 1; j < n; ++j) v.noalias() += prow[j] * field.row(j);
            out.segment(i * nb, nb) = reg_->gram_solve(i, reg_->basis(i).transpose() * v.transpose());
        }
    };

    Eigen::MatrixXd u0(n, paths);
    for (int m = 0; m < paths; ++m)
        for (int i = 0; i < n; ++i) u0(i, m) = rhs.at(m, i);
    forward_subst(ops_.klow, u0);

    Eigen::VectorXd d(n * nb);
    project(u0, d);
    const Eigen::VectorXd c = coeff_lu_.solve(d);

    Eigen::MatrixXd w(n, paths);
    for (int i = 0; i < n; ++i) w.row(i) = (reg_->basis(i) * c.segment(i * nb, nb)).transpose();
    forward_subst(ops_.klow, w);
    u0 -= w;
    for (int m = 0; m < paths; ++m) {
        for (int i = 0; i < n; ++i) u.at(m, i) = u0(i, m);
        u.at(m, n) = 0.0;
    }
}

void solve_linear_foc_step(const PathSet& rhs, PathSet& u, const SchemeConfig& cfg,
                           const SchemeOperators& ops, const CondExpProvider& ce) {
    (void)cfg;
    LinearFocSolver(ops, ce).solve(rhs, u);
}

double foc_error_e1(const PathSet& u, const PathSet& r, const PathSet& f, const PathSet& alpha,
                    const SchemeConfig& cfg, const SchemeOperators& ops, const CondExpProvider& ce) {
    const int n = ops.full.n;
    const TimeGrid& grid = u.grid();
    const double dt = grid.delta();
    PathSet adj_pen(grid, u.paths());
    apply_adjoint(ops.pen, u, ce, adj_pen);
    double worst = 0.0;
    for (int m = 0; m < u.paths(); ++m) {
        const double* ur = u.row(m);
        const double* rr = r.row(m);
        const double* fr = f.row(m);
        const double* ar = alpha.row(m);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double res = cfg.gamma * ur[i];
            res += simd::dot(ops.full.fwd_row(i), ur, static_cast<std::size_t>(i));
            res += simd::dot(ops.pen.fwd_row(i), ur, static_cast<std::size_t>(i));
            res += adj_pen.at(m, i);
            res -= simd::dot(ops.full.fwd_row(i), rr, static_cast<std::size_t>(i));
            res += fr[i] - ar[i];
            res += cfg.x0 * (cfg.penalty.phi * (grid.horizon() - grid.node(i)) + cfg.penalty.varrho);
            acc += res * res;
        }
        worst = std::max(worst, acc * dt);
    }
    return worst;
}

SchemeResult iterate_scheme(const SchemeConfig& cfg, const PathSet& alpha, const CondExpProvider& ce,
                            const SchemeOperators& ops) {
    cfg.validate();
    const TimeGrid& grid = ops.grid;
    const int n = grid.steps();
    const int paths = alpha.paths();

    PathSet rhs0(grid, paths);
    for (int m = 0; m < paths; ++m) {
        const double* ar = alpha.row(m);
        double* rr = rhs0.row(m);
        for (int i = 0; i < n; ++i)
            rr[i] = ar[i] - cfg.x0 * (cfg.penalty.phi * (grid.horizon() - grid.node(i)) + cfg.penalty.varrho);
        rr[n] = 0.0;
    }

    SchemeResult result{PathSet(grid, paths), PathSet(grid, paths), PathSet(grid, paths)};
    PathSet rhs(grid, paths);
    const auto t0 = std::chrono::steady_clock::now();
    const LinearFocSolver step(ops, ce);
    for (int iter = 1; iter <= cfg.max_outer; ++iter) {
        const PathSet a = assemble_A(result.u, result.r, result.f, ops);
        for (int m = 0; m < paths; ++m)
            for (int i = 0; i <= n; ++i) rhs.at(m, i) = rhs0.at(m, i) + a.at(m, i);
        step.solve(rhs, result.u);
        const ResistanceResult rr =
            solve_resistance(result.u, result.r, ops.transient, cfg.resistance, cfg.eps2, cfg.max_picard);
        result.picard_total += rr.iterations;
        result.f = solve_backward_f(result.u, result.r, ops.transient, ops.full, cfg.resistance, ce);
        const double e1 = foc_error_e1(result.u, result.r, result.f, alpha, cfg, ops, ce);
        const double ebf =
            backward_error_ebf(result.f, result.u, result.r, ops.transient, ops.full, cfg.resistance, ce);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.push_back({iter, e1, rr.e2, ebf, secs});
        if (e1 <= cfg.eps1) {
            result.converged = true;
            break;
        }
    }
    return result;
}

PathSet solve_linear_direct(double slope, const SchemeConfig& cfg, const SchemeOperators& ops,
                            const PathSet& alpha) {
    const int n = ops.full.n;
    const TimeGrid& grid = ops.grid;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd lg = dense_forward(ops.transient);
    const Eigen::MatrixXd mg = dense_adjoint(ops.transient);
    const Eigen::MatrixXd lfull = dense_forward(ops.full);
    const Eigen::MatrixXd mfull = dense_adjoint(ops.full);
    // Linear response r = slope * L_g (u - r) eliminates to r = (I + s L_g)^{-1} s L_g u,
    // and the auxiliary process to f = (I + s M_g)^{-1} M_full u.
    Eigen::MatrixXd d = cfg.gamma * id;
    d += lfull * (id + slope * lg).partialPivLu().solve(id);
    d += (id + slope * mg).partialPivLu().solve(mfull);
    d += dense_forward(ops.pen) + dense_adjoint(ops.pen);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(d);

    Eigen::MatrixXd b(n, alpha.paths());
    for (int m = 0; m < alpha.paths(); ++m)
        for (int i = 0; i < n; ++i)
            b(i, m) = alpha.at(m, i) -
                      cfg.x0 * (cfg.penalty.phi * (grid.horizon() - grid.node(i)) + cfg.penalty.varrho);
    const Eigen::MatrixXd sol = lu.solve(b);
    PathSet u(grid, alpha.paths());
    for (int m = 0; m < alpha.paths(); ++m) {
        for (int i = 0; i < n; ++i) u.at(m, i) = sol(i, m);
        u.at(m, n) = 0.0;
    }
    return u;
}

ConvergenceReport check_convergence_conditions(const SchemeConfig& cfg, double horizon) {
    cfg.validate();
    ConvergenceReport rep;
    rep.c_g = kernel_l2_constant(cfg.kernel.transient_only(), horizon);
    rep.c_gh = kernel_l2_constant(cfg.kernel, horizon);
    rep.lip = cfg.resistance.lipschitz();
    const double root_tg = std::sqrt(horizon * rep.c_g);
    rep.resistance_gain = rep.lip * root_tg;
    rep.kernel_condition = rep.resistance_gain < 1.0;
    if (rep.kernel_condition) {
        rep.c_tilde = std::sqrt(horizon * rep.c_gh) *
                      (rep.resistance_gain / (1.0 - rep.resistance_gain) + 1.0 / (1.0 - rep.resistance_gain));
        rep.slippage_condition = cfg.gamma > rep.c_tilde;
        rep.rate = rep.c_tilde / cfg.gamma;
    } else {
        rep.c_tilde = std::numeric_limits<double>::infinity();
        rep.slippage_condition = false;
        rep.rate = std::numeric_limits<double>::infinity();
    }
    return rep;
}

}  // namespace qmr
