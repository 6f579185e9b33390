#include "qmr/resistance.hpp"

#include <cmath>
#include <vector>

#include "qmr/simd/kernels.hpp"

namespace qmr {

double ResistanceFn::value(double x) const {
    switch (variant) {
        case Variant::zero:
            return 0.0;
        case Variant::linear:
            return slope * x;
        case Variant::huberized_power: {
            const double ax = std::abs(x);
            const double s = x < 0.0 ? -1.0 : 1.0;
            if (ax <= delta) return s * std::pow(ax, c);
            return c * std::pow(delta, c - 1.0) * x - s * std::pow(delta, c) * (c - 1.0);
        }
    }
    return 0.0;
}

double ResistanceFn::derivative(double x) const {
    switch (variant) {
        case Variant::zero:
            return 0.0;
        case Variant::linear:
            return slope;
        case Variant::huberized_power: {
            const double ax = std::abs(x);
            if (ax <= delta) return c * std::pow(ax, c - 1.0);
            return c * std::pow(delta, c - 1.0);
        }
    }
    return 0.0;
}

double ResistanceFn::lipschitz() const {
    switch (variant) {
        case Variant::zero:
            return 0.0;
        case Variant::linear:
            return slope;
        case Variant::huberized_power:
            return c * std::pow(delta, c - 1.0);
    }
    return 0.0;
}

double resistance_error_e2(const PathSet& u, const PathSet& r, const NystromMatrices& lg,
                           const ResistanceFn& fn) {
    fn.validate();
    const int n = lg.n;
    double worst = 0.0;
    for (int m = 0; m < u.paths(); ++m) {
        const double* ur = u.row(m);
        const double* rr = r.row(m);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = simd::dot_diff(lg.fwd_row(i), ur, rr, static_cast<std::size_t>(i));
            const double res = rr[i] - fn.value(z);
            acc += res * res;
        }
        worst = std::max(worst, acc * u.grid().delta());
    }
    return worst;
}

ResistanceResult solve_resistance(const PathSet& u, PathSet& r, const NystromMatrices& lg,
                                  const ResistanceFn& fn, double eps2, int max_iters) {
    fn.validate();
    const int n = lg.n;
    const double dt = u.grid().delta();
    PathSet next(u.grid(), u.paths());
    double e2 = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        double worst = 0.0;
        bool finite = true;
        for (int m = 0; m < u.paths(); ++m) {
            const double* ur = u.row(m);
            const double* rr = r.row(m);
            double* nr = next.row(m);
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const double z = simd::dot_diff(lg.fwd_row(i), ur, rr, static_cast<std::size_t>(i));
                nr[i] = fn.value(z);
                const double res = rr[i] - nr[i];
                acc += res * res;
            }
            acc *= dt;
            if (!std::isfinite(acc)) finite = false;
            worst = std::max(worst, acc);
        }
        e2 = worst;
        // r's own defect was just measured; keep r (not next) if it passes.
        if (finite && e2 <= eps2) return {it, e2};
        for (int m = 0; m < u.paths(); ++m) {
            const double* nr = next.row(m);
            double* rr = r.row(m);
            for (int i = 0; i < n; ++i) rr[i] = nr[i];
        }
    }
    throw NonConvergenceError("solve_resistance: fixed point iteration did not reach eps2", e2);
}

void solve_resistance_direct(const PathSet& u, PathSet& r, const NystromMatrices& lg,
                             const ResistanceFn& fn) {
    fn.validate();
    const int n = lg.n;
    for (int m = 0; m < u.paths(); ++m) {
        const double* ur = u.row(m);
        double* rr = r.row(m);
        for (int i = 0; i < n; ++i) {
            const double z = simd::dot_diff(lg.fwd_row(i), ur, rr, static_cast<std::size_t>(i));
            rr[i] = fn.value(z);
        }
        rr[n] = 0.0;
    }
}

}  // namespace qmr
