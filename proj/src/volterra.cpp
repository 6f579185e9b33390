#include "qmr/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qmr/simd/kernels.hpp"

namespace qmr {

void apply_forward(const NystromMatrices& mat, const PathSet& u, PathSet& out) {
    const int n = mat.n;
    if (u.grid().steps() != n || out.grid().steps() != n || out.paths() != u.paths())
        throw std::invalid_argument("apply_forward: shape mismatch");
    for (int m = 0; m < u.paths(); ++m) {
        const double* ur = u.row(m);
        double* orow = out.row(m);
        for (int i = 0; i < n; ++i) orow[i] = simd::dot(mat.fwd_row(i), ur, static_cast<std::size_t>(i));
        orow[n] = 0.0;
    }
}

void apply_adjoint(const NystromMatrices& mat, const PathSet& u, const CondExpProvider& ce, PathSet& out) {
    const int n = mat.n;
    const int paths = u.paths();
    if (u.grid().steps() != n || out.grid().steps() != n || out.paths() != paths)
        throw std::invalid_argument("apply_adjoint: shape mismatch");
    if (ce.is_deterministic()) {
        for (int m = 0; m < paths; ++m) {
            const double* ur = u.row(m);
            double* orow = out.row(m);
            for (int i = 0; i < n; ++i)
                orow[i] = simd::dot(mat.adj_row(i) + i, ur + i, static_cast<std::size_t>(n - i));
            orow[n] = 0.0;
        }
        return;
    }
    // Column-major staging: row k of cols holds u at node k across paths.
    std::vector<double> cols(static_cast<std::size_t>(n) * paths);
    for (int k = 0; k < n; ++k)
        u.gather_node(k, std::span<double>(cols.data() + static_cast<std::size_t>(k) * paths, paths));
    std::vector<double> est;
    for (int i = 0; i < n; ++i) {
        const int k_rows = n - 1 - i;
        est.assign(static_cast<std::size_t>(std::max(k_rows, 0)) * paths, 0.0);
        if (k_rows > 0)
            ce.estimate_block(i, cols.data() + static_cast<std::size_t>(i + 1) * paths, k_rows, paths, est.data());
        const double* arow = mat.adj_row(i);
        for (int m = 0; m < paths; ++m) {
            double acc = arow[i] * u.at(m, i);
            for (int k = 0; k < k_rows; ++k) acc += arow[i + 1 + k] * est[static_cast<std::size_t>(k) * paths + m];
            out.at(m, i) = acc;
        }
    }
    for (int m = 0; m < paths; ++m) out.at(m, n) = 0.0;
}

double inner_product(const PathSet& f, const PathSet& g) {
    if (f.paths() != g.paths() || f.nodes() != g.nodes())
        throw std::invalid_argument("inner_product: shape mismatch");
    const int n = f.grid().steps();
    double acc = 0.0;
    for (int m = 0; m < f.paths(); ++m)
        acc += simd::dot(f.row(m), g.row(m), static_cast<std::size_t>(n));
    return acc * f.grid().delta() / f.paths();
}

double discrete_norm(const PathSet& f) {
    const int n = f.grid().steps();
    double acc = 0.0;
    for (int m = 0; m < f.paths(); ++m) acc += simd::sum_sq(f.row(m), static_cast<std::size_t>(n));
    return std::sqrt(acc * f.grid().delta() / f.paths());
}

}  // namespace qmr
