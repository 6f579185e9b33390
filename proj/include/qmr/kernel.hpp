#pragma once

#include <cmath>
#include <stdexcept>

namespace qmr {

/// Impact kernel K(t) = kappa_inf + lambda * t^(nu-1): a permanent level plus a
/// power-law transient decay.
struct KernelSpec {
    double kappa_inf = 0.0;
    double lambda = 0.0;
    double nu = 0.5;

    void validate() const {
        if (kappa_inf < 0.0) throw std::invalid_argument("KernelSpec: kappa_inf must be >= 0");
        if (lambda < 0.0) throw std::invalid_argument("KernelSpec: lambda must be >= 0");
        if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("KernelSpec: nu must lie in (0,1)");
    }

    KernelSpec transient_only() const { return {0.0, lambda, nu}; }

    /// Antiderivative of the kernel on [0, x], x >= 0. Exact; used for all
    /// Nystrom cell integrals.
    double primitive(double x) const {
        if (x <= 0.0) return 0.0;
        return kappa_inf * x + (lambda / nu) * std::pow(x, nu);
    }

    /// Second antiderivative (primitive of primitive) on [0, x].
    double primitive2(double x) const {
        if (x <= 0.0) return 0.0;
        return 0.5 * kappa_inf * x * x + (lambda / (nu * (nu + 1.0))) * std::pow(x, nu + 1.0);
    }
};

double kernel_value(const KernelSpec& spec, double t);

/// C_G = sup_{t<=T} int_0^t K(s)^2 ds, in closed form. Requires nu > 1/2 when
/// the transient part is active (the integral diverges otherwise).
double kernel_l2_constant(const KernelSpec& spec, double horizon);

}  // namespace qmr
