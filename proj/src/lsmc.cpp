#include "qmr/lsmc.hpp"

#include <cmath>
#include <stdexcept>

namespace qmr {

Eigen::VectorXd fit_cond_exp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double penalty) {
    if (x.rows() != y.size()) throw std::invalid_argument("fit_cond_exp: sample count mismatch");
    if (x.rows() < x.cols()) throw std::invalid_argument("fit_cond_exp: fewer samples than regressors");
    if (penalty < 0.0) throw std::invalid_argument("fit_cond_exp: penalty must be >= 0");
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += penalty;
    return Eigen::LLT<Eigen::MatrixXd>(gram).solve(x.transpose() * y);
}

Eigen::VectorXd predict(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta) {
    if (x.cols() != beta.size()) throw std::invalid_argument("predict: regressor count mismatch");
    return x * beta;
}

RegressionCondExp::RegressionCondExp(const FeatureSet& features, double penalty)
    : paths_(features.paths()), steps_(features.grid().steps()), penalty_(penalty) {
    if (penalty < 0.0) throw std::invalid_argument("RegressionCondExp: penalty must be >= 0");
    if (paths_ < basis_size)
        throw std::invalid_argument("RegressionCondExp: fewer paths than regressors");
    basis_.resize(static_cast<std::size_t>(steps_));
    gram_llt_.resize(static_cast<std::size_t>(steps_));
    gram_.resize(static_cast<std::size_t>(steps_));
    std::vector<double> col(static_cast<std::size_t>(paths_));
    for (int p = 0; p < steps_; ++p) {
        Eigen::MatrixXd x(paths_, basis_size);
        x.col(0).setOnes();
        for (int f = 0; f < FeatureSet::raw_count; ++f) {
            features.raw[static_cast<std::size_t>(f)].gather_node(p, col);
            double mean = 0.0;
            for (double v : col) mean += v;
            mean /= paths_;
            double var = 0.0;
            for (double v : col) var += (v - mean) * (v - mean);
            var /= paths_;
            const double sd = std::sqrt(var);
            for (int m = 0; m < paths_; ++m) {
                const double s = sd > 1e-300 ? (col[static_cast<std::size_t>(m)] - mean) / sd : 0.0;
                x(m, 1 + 2 * f) = laguerre(1, s);
                x(m, 2 + 2 * f) = laguerre(2, s);
            }
        }
        Eigen::MatrixXd gram = x.transpose() * x;
        gram.diagonal().array() += penalty_;
        gram_llt_[static_cast<std::size_t>(p)].compute(gram);
        if (gram_llt_[static_cast<std::size_t>(p)].info() != Eigen::Success)
            throw std::runtime_error("RegressionCondExp: ridge Gram matrix not positive definite");
        gram_[static_cast<std::size_t>(p)] = std::move(gram);
        basis_[static_cast<std::size_t>(p)] = std::move(x);
    }
}

void RegressionCondExp::estimate(int p, std::span<const double> y, std::span<double> out) const {
    estimate_block(p, y.data(), 1, static_cast<int>(y.size()), out.data());
}

void RegressionCondExp::estimate_block(int p, const double* targets, int k_rows, int paths,
                                       double* out) const {
    if (paths != paths_) throw std::invalid_argument("RegressionCondExp: path count mismatch");
    if (p < 0 || p >= steps_) throw std::invalid_argument("RegressionCondExp: node out of range");
    if (k_rows <= 0) return;
    const Eigen::MatrixXd& x = basis_[static_cast<std::size_t>(p)];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> y(
        targets, k_rows, paths);
    // rhs column k = X' y_k
    Eigen::MatrixXd rhs = x.transpose() * y.transpose();
    Eigen::MatrixXd beta = gram_llt_[static_cast<std::size_t>(p)].solve(rhs);
    const double rhs_norm = rhs.norm();
    if (rhs_norm > 0.0) {
        const double res = (gram_[static_cast<std::size_t>(p)] * beta - rhs).norm() / rhs_norm;
        if (res > max_residual_) max_residual_ = res;
    }
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> fit(
        out, k_rows, paths);
    fit = (x * beta).transpose();
}

}  // namespace qmr
