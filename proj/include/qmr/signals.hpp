#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "qmr/path_set.hpp"

namespace qmr {

/// Ornstein-Uhlenbeck drift: d mu = (eta - kappa*mu) dt + sigma dW.
struct OUParams {
    double eta = 0.0;
    double kappa = 1.0;
    double sigma = 0.0;
    double mu0 = 0.0;

    void validate() const {
        if (!(kappa > 0.0)) throw std::invalid_argument("OUParams: kappa must be positive");
        if (sigma < 0.0) throw std::invalid_argument("OUParams: sigma must be >= 0");
    }
};

/// Simulate mu on all grid nodes with the exact Gaussian transition. Each path
/// uses its own RNG stream seeded from (seed, path index), so path m is
/// reproducible independently of the total path count.
PathSet simulate_mu(const OUParams& p, const TimeGrid& grid, int paths, std::uint64_t seed);

/// Trading signal alpha_t = E_t[P_T - P_t] for the price with drift mu:
/// alpha_t = (mu_t - eta/kappa)(1 - e^{-kappa(T-t)})/kappa + (eta/kappa)(T-t).
PathSet alpha_closed_form(const OUParams& p, const PathSet& mu);

/// Raw regression features for conditional expectations at each node:
/// the signal alpha itself, its running time integral, and an exponentially
/// discounted running integral (memory of past signal at the OU rate).
struct FeatureSet {
    static constexpr int raw_count = 3;
    std::array<PathSet, raw_count> raw;

    const TimeGrid& grid() const { return raw[0].grid(); }
    int paths() const { return raw[0].paths(); }
};

FeatureSet build_features(const OUParams& p, const PathSet& alpha);

/// Laguerre polynomials used as the regression basis: l0 = 1, l1 = 1 - x,
/// l2 = 1 - 2x + x^2/2.
double laguerre(int order, double x);

}  // namespace qmr
