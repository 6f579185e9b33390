#include "qmr/signals.hpp"

#include <cmath>
#include <random>

namespace qmr {

PathSet simulate_mu(const OUParams& p, const TimeGrid& grid, int paths, std::uint64_t seed) {
    p.validate();
    const int n = grid.steps();
    const double dt = grid.delta();
    const double decay = std::exp(-p.kappa * dt);
    const double mean_level = p.eta / p.kappa;
    const double noise = p.sigma * std::sqrt((1.0 - decay * decay) / (2.0 * p.kappa));
    PathSet mu(grid, paths);
    for (int m = 0; m < paths; ++m) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(m), 0x9e3779b9u};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double* row = mu.row(m);
        row[0] = p.mu0;
        for (int i = 0; i < n; ++i) {
            const double z = p.sigma > 0.0 ? gauss(rng) : 0.0;
            row[i + 1] = row[i] * decay + mean_level * (1.0 - decay) + noise * z;
        }
    }
    return mu;
}

PathSet alpha_closed_form(const OUParams& p, const PathSet& mu) {
    p.validate();
    const TimeGrid& grid = mu.grid();
    const int n = grid.steps();
    const double horizon = grid.horizon();
    const double mean_level = p.eta / p.kappa;
    PathSet alpha(grid, mu.paths());
    for (int m = 0; m < mu.paths(); ++m) {
        const double* mr = mu.row(m);
        double* ar = alpha.row(m);
        for (int i = 0; i <= n; ++i) {
            const double rem = horizon - grid.node(i);
            ar[i] = (mr[i] - mean_level) * (1.0 - std::exp(-p.kappa * rem)) / p.kappa + mean_level * rem;
        }
    }
    return alpha;
}

FeatureSet build_features(const OUParams& p, const PathSet& alpha) {
    p.validate();
    const TimeGrid& grid = alpha.grid();
    const int n = grid.steps();
    const double dt = grid.delta();
    const double decay = std::exp(-p.kappa * dt);
    FeatureSet fs{{alpha, PathSet(grid, alpha.paths()), PathSet(grid, alpha.paths())}};
    for (int m = 0; m < alpha.paths(); ++m) {
        const double* ar = alpha.row(m);
        double* run = fs.raw[1].row(m);
        double* mem = fs.raw[2].row(m);
        run[0] = 0.0;
        mem[0] = 0.0;
        for (int i = 0; i < n; ++i) {
            run[i + 1] = run[i] + ar[i] * dt;
            mem[i + 1] = mem[i] * decay + ar[i] * dt;
        }
    }
    return fs;
}

double laguerre(int order, double x) {
    switch (order) {
        case 0: return 1.0;
        case 1: return 1.0 - x;
        case 2: return 1.0 - 2.0 * x + 0.5 * x * x;
        default: throw std::invalid_argument("laguerre: order must be 0, 1, or 2");
    }
}

}  // namespace qmr
