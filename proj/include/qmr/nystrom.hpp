#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qmr/kernel.hpp"
#include "qmr/time_grid.hpp"

namespace qmr {

/// Nystrom discretization of the forward (Volterra) and adjoint convolution
/// operators on a uniform grid. Entries are exact cell integrals of the kernel:
///   forward(i,j) = int_{t_j}^{t_{j+1}} K(t_i - s) ds   for j < i (strictly lower)
///   adjoint(i,j) = int_{t_j}^{t_{j+1}} K(s - t_i) ds   for j >= i (upper incl. diagonal)
/// Stored dense row-major, size n x n with n = grid.steps().
struct NystromMatrices {
    int n = 0;
    std::vector<double> forward;  // strictly lower triangular
    std::vector<double> adjoint;  // upper triangular incl. diagonal

    double fwd(int i, int j) const { return forward[static_cast<std::size_t>(i) * n + j]; }
    double adj(int i, int j) const { return adjoint[static_cast<std::size_t>(i) * n + j]; }
    const double* fwd_row(int i) const { return forward.data() + static_cast<std::size_t>(i) * n; }
    const double* adj_row(int i) const { return adjoint.data() + static_cast<std::size_t>(i) * n; }
};

NystromMatrices build_nystrom(const KernelSpec& spec, const TimeGrid& grid);

/// Inventory penalty kernel H(t,s) = (phi*(T-t) + varrho) * 1_{t>s}. Not a
/// convolution; discretized with the same cell-integration rule.
struct PenaltyKernelParams {
    double phi = 0.0;
    double varrho = 0.0;

    void validate() const {
        if (phi < 0.0) throw std::invalid_argument("PenaltyKernelParams: phi must be >= 0");
        if (varrho < 0.0) throw std::invalid_argument("PenaltyKernelParams: varrho must be >= 0");
    }
};

NystromMatrices build_penalty_matrices(const PenaltyKernelParams& params, const TimeGrid& grid);

/// Symmetric matrix of exact cell-pair double integrals of K(|t-s|), the Gram
/// matrix of the quadratic impact cost in the piecewise-constant basis. Used
/// for positive-semidefiniteness diagnostics of the discretization.
Eigen::MatrixXd symmetric_cost_matrix(const KernelSpec& spec, const TimeGrid& grid);

double min_eigenvalue(const Eigen::MatrixXd& sym);

}  // namespace qmr
