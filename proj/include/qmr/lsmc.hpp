#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qmr/signals.hpp"
#include "qmr/volterra.hpp"

namespace qmr {

/// Ridge regression via the normal equations: beta = (X'X + penalty*I)^{-1} X'y.
/// Throws if there are fewer samples than regressors.
Eigen::VectorXd fit_cond_exp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double penalty);

Eigen::VectorXd predict(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta);

/// Conditional expectation provider backed by least squares Monte Carlo.
/// At each node the three raw features are standardized across paths and
/// expanded in Laguerre polynomials up to order 2 (shared constant), giving
/// 7 regressors. The Cholesky factor of each node's ridge Gram matrix is
/// computed once and reused for every regression target at that node.
class RegressionCondExp final : public CondExpProvider {
public:
    static constexpr int basis_size = 1 + 2 * FeatureSet::raw_count;

    RegressionCondExp(const FeatureSet& features, double penalty);

    bool is_deterministic() const override { return false; }
    void estimate(int p, std::span<const double> y, std::span<double> out) const override;
    void estimate_block(int p, const double* targets, int k_rows, int paths, double* out) const override;

    /// Largest relative normal equation residual
    /// ||(X'X + penalty I) beta - X'y|| / ||X'y|| observed across all fits.
    double max_normal_eq_residual() const { return max_residual_; }

    /// Standardized basis matrix (paths x basis_size) at node p. Exposed so
    /// linear solvers can exploit the low rank of the projection directly.
    const Eigen::MatrixXd& basis(int p) const { return basis_[static_cast<std::size_t>(p)]; }

    /// Solve (X'X + penalty I) beta = rhs with the cached factorization.
    Eigen::MatrixXd gram_solve(int p, const Eigen::MatrixXd& rhs) const {
        return gram_llt_[static_cast<std::size_t>(p)].solve(rhs);
    }

private:
    int paths_;
    int steps_;
    double penalty_;
    // Per node: basis matrix (paths x basis_size) and LLT of the ridge Gram.
    std::vector<Eigen::MatrixXd> basis_;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> gram_llt_;
    std::vector<Eigen::MatrixXd> gram_;
    mutable double max_residual_ = 0.0;
};

}  // namespace qmr
