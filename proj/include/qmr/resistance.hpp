#pragma once

#include <stdexcept>
#include <string>

#include "qmr/path_set.hpp"
#include "qmr/volterra.hpp"

namespace qmr {

/// Market response map U applied to accumulated transient impact. Variants:
/// huberized power sign(x)|x|^c with linear extension beyond |x| > delta,
/// plain linear slope a, or identically zero (no resistance).
struct ResistanceFn {
    enum class Variant { huberized_power, linear, zero };

    Variant variant = Variant::huberized_power;
    double c = 2.0;        // power exponent, >= 1
    double delta = 1e6;    // huberization threshold
    double slope = 0.0;    // linear variant

    void validate() const {
        if (variant == Variant::huberized_power) {
            if (!(c >= 1.0)) throw std::invalid_argument("ResistanceFn: c must be >= 1");
            if (!(delta > 0.0)) throw std::invalid_argument("ResistanceFn: delta must be positive");
        }
        if (variant == Variant::linear && slope < 0.0)
            throw std::invalid_argument("ResistanceFn: slope must be >= 0");
    }

    double value(double x) const;
    double derivative(double x) const;

    /// Global Lipschitz constant (also bounds |U'|): c*delta^(c-1), slope, or 0.
    double lipschitz() const;
};

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double last_error)
        : std::runtime_error(what), last_error_(last_error) {}
    double last_error() const { return last_error_; }

private:
    double last_error_;
};

struct ResistanceResult {
    int iterations = 0;
    double e2 = 0.0;  // fixed point defect at exit
};

/// Fixed point residual: max over paths of delta * sum_i |r_i - U((L_G(u-r))_i)|^2.
double resistance_error_e2(const PathSet& u, const PathSet& r, const NystromMatrices& lg,
                           const ResistanceFn& fn);

/// Picard iteration r <- U(L_G(u - r)), warm started from the passed-in r.
/// Stops when the fixed point defect e2 <= eps2; throws NonConvergenceError
/// after max_iters sweeps.
ResistanceResult solve_resistance(const PathSet& u, PathSet& r, const NystromMatrices& lg,
                                  const ResistanceFn& fn, double eps2, int max_iters = 500);

/// Exact causal forward substitution: the discrete fixed point map is strictly
/// lower triangular, so one in-order sweep computing r_i from r_0..r_{i-1} is
/// exact. Used for deterministic impact profiles on large grids.
void solve_resistance_direct(const PathSet& u, PathSet& r, const NystromMatrices& lg,
                             const ResistanceFn& fn);

}  // namespace qmr
