#pragma once

#include <span>

#include "qmr/nystrom.hpp"
#include "qmr/path_set.hpp"

namespace qmr {

/// Conditional expectation oracle E_{t_p}[ . ] for node values later than p.
/// The deterministic implementation is the identity; the Monte Carlo
/// implementation regresses on signal features (see lsmc.hpp).
class CondExpProvider {
public:
    virtual ~CondExpProvider() = default;

    virtual bool is_deterministic() const = 0;

    /// Estimate E_{t_p}[y] per path, where y holds one value per path observed
    /// after t_p. out may alias nothing; both spans have length paths.
    virtual void estimate(int p, std::span<const double> y, std::span<double> out) const = 0;

    /// Batched variant: targets is K rows of length paths (row k = values at
    /// some node > p), out has the same layout. Default loops estimate().
    virtual void estimate_block(int p, const double* targets, int k_rows, int paths, double* out) const {
        for (int k = 0; k < k_rows; ++k) {
            estimate(p, std::span<const double>(targets + static_cast<std::size_t>(k) * paths, paths),
                     std::span<double>(out + static_cast<std::size_t>(k) * paths, paths));
        }
    }
};

/// Identity oracle for sigma = 0 (all information is already known at time 0).
class DeterministicCondExp final : public CondExpProvider {
public:
    bool is_deterministic() const override { return true; }
    void estimate(int /*p*/, std::span<const double> y, std::span<double> out) const override {
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i];
    }
};

/// out(m,i) = sum_{j<i} L(i,j) u(m,j): the discretized causal Volterra
/// operator, applied pathwise. Node steps()..: out is 0 beyond the last
/// interior node by convention (value at node N set to 0).
void apply_forward(const NystromMatrices& mat, const PathSet& u, PathSet& out);

/// out(m,i) = sum_{j>=i} M(i,j) E_{t_i}[u(m,j)]: the adjoint with conditional
/// expectations supplied by ce.
void apply_adjoint(const NystromMatrices& mat, const PathSet& u, const CondExpProvider& ce, PathSet& out);

/// Monte Carlo discrete inner product:
/// (1/M) sum_m delta * sum_{i=0}^{N-1} f(m,i) g(m,i).
double inner_product(const PathSet& f, const PathSet& g);

/// sqrt(inner_product(f, f)).
double discrete_norm(const PathSet& f);

}  // namespace qmr
