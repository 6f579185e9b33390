#include "qmr/nystrom.hpp"

namespace qmr {

NystromMatrices build_nystrom(const KernelSpec& spec, const TimeGrid& grid) {
    spec.validate();
    const int n = grid.steps();
    NystromMatrices m;
    m.n = n;
    m.forward.assign(static_cast<std::size_t>(n) * n, 0.0);
    m.adjoint.assign(static_cast<std::size_t>(n) * n, 0.0);
    // Uniform grid: cell integrals depend only on i - j. Precompute the
    // primitive at node offsets once.
    std::vector<double> prim(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) prim[static_cast<std::size_t>(k)] = spec.primitive(grid.node(k));
    for (int i = 0; i < n; ++i) {
        double* fr = m.forward.data() + static_cast<std::size_t>(i) * n;
        double* ar = m.adjoint.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < i; ++j) fr[j] = prim[static_cast<std::size_t>(i - j)] - prim[static_cast<std::size_t>(i - j - 1)];
        for (int j = i; j < n; ++j) ar[j] = prim[static_cast<std::size_t>(j + 1 - i)] - prim[static_cast<std::size_t>(j - i)];
    }
    return m;
}

NystromMatrices build_penalty_matrices(const PenaltyKernelParams& params, const TimeGrid& grid) {
    params.validate();
    const int n = grid.steps();
    const double dt = grid.delta();
    const double horizon = grid.horizon();
    NystromMatrices m;
    m.n = n;
    m.forward.assign(static_cast<std::size_t>(n) * n, 0.0);
    m.adjoint.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        double* fr = m.forward.data() + static_cast<std::size_t>(i) * n;
        double* ar = m.adjoint.data() + static_cast<std::size_t>(i) * n;
        const double ti = grid.node(i);
        // forward: int_{t_j}^{t_{j+1}} (phi*(T-t_i) + varrho) ds, cells fully below t_i
        const double row_val = (params.phi * (horizon - ti) + params.varrho) * dt;
        for (int j = 0; j < i; ++j) fr[j] = row_val;
        // adjoint: int over {s in cell j : s > t_i} of phi*(T-s) + varrho.
        // Diagonal cell [t_i, t_{i+1}] is fully above t_i.
        for (int j = i; j < n; ++j) {
            const double a = grid.node(j);
            const double b = grid.node(j + 1);
            ar[j] = params.phi * ((horizon - a) * (horizon - a) - (horizon - b) * (horizon - b)) * 0.5 +
                    params.varrho * (b - a);
        }
    }
    return m;
}

Eigen::MatrixXd symmetric_cost_matrix(const KernelSpec& spec, const TimeGrid& grid) {
    spec.validate();
    const int n = grid.steps();
    Eigen::MatrixXd b(n, n);
    // Cell-pair double integral of K(|t-s|) over [t_i,t_{i+1}] x [t_j,t_{j+1}],
    // via the second antiderivative P2:
    //   B(i,j) = P2(|d|+dt) + P2(|d|-dt) - 2*P2(|d|)  with d = t_i - t_j,
    // which covers the diagonal (2*P2(dt)) as well.
    std::vector<double> p2(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) p2[static_cast<std::size_t>(k)] = spec.primitive2(grid.node(k));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const int d = i - j;
            const double upper = p2[static_cast<std::size_t>(d + 1)];
            const double lower = d > 0 ? p2[static_cast<std::size_t>(d - 1)] : p2[1];
            const double val = upper + lower - 2.0 * p2[static_cast<std::size_t>(d)];
            b(i, j) = val;
            b(j, i) = val;
        }
    }
    return b;
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace qmr
